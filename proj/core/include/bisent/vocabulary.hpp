#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bisent/preprocess.hpp"

namespace bisent {

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr std::size_t kReservedIds = 2;

// Token norm -> id. Ids 0 and 1 are PAD and OOV; words start at 2.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Most frequent norms first, ties in byte order, capped at max_size - 2
  // words. Throws DataError for an empty document set and
  // std::invalid_argument when max_size < 3.
  static Vocabulary build(std::span<const Document> docs, std::size_t max_size);

  // Words in id order (id = index + 2). Throws DataError on duplicates.
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t size() const { return words_.size() + kReservedIds; }
  int id(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

  // FNV-1a of the serialized file; stored in model files.
  std::uint64_t hash() const;

  // "word<TAB>id" per line, ids ascending from 2.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

struct EncodedSequence {
  std::vector<int> token_ids;  // may carry PAD ids after `length`
  std::size_t length = 0;
};

// Token norms to ids, truncated to max_seq_len. An empty document encodes
// as a single OOV token so every post gets a prediction.
EncodedSequence encode(const Document& doc, const Vocabulary& vocab, std::size_t max_seq_len);

}  // namespace bisent
