#include "bisent/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {

Vocabulary Vocabulary::build(std::span<const Document> docs, std::size_t max_size) {
  if (docs.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (max_size <= kReservedIds) throw std::invalid_argument("vocabulary max_size must exceed 2");
  std::map<std::string, std::int64_t> freq;
  for (const auto& doc : docs) {
    for (const auto& t : doc.tokens) ++freq[t.norm];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const auto keep = std::min(ranked.size(), max_size - kReservedIds);
  std::vector<std::string> words;
  words.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) words.push_back(ranked[i].first);
  return from_words(std::move(words));
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  Vocabulary v;
  v.words_ = std::move(words);
  for (std::size_t i = 0; i < v.words_.size(); ++i) {
    const auto& w = v.words_[i];
    if (w.empty() || w.find_first_of("\t\n") != std::string::npos) {
      throw DataError("invalid vocabulary word '" + w + "'");
    }
    if (!v.index_.emplace(w, static_cast<int>(i + kReservedIds)).second) {
      throw DataError("duplicate vocabulary word '" + w + "'");
    }
  }
  return v;
}

int Vocabulary::id(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? kOovId : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::ostringstream out;
  write(out);
  return fnv1a(out.str());
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << (i + kReservedIds) << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) throw DataError("vocabulary line " + std::to_string(words.size() + 1) + ": expected word<TAB>id");
    if (parse_int(fields[1]) != static_cast<std::int64_t>(words.size() + kReservedIds)) {
      throw DataError("vocabulary ids must ascend from 2 without gaps");
    }
    words.push_back(fields[0]);
  }
  return from_words(std::move(words));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  return read(in);
}

EncodedSequence encode(const Document& doc, const Vocabulary& vocab, std::size_t max_seq_len) {
  if (max_seq_len == 0) throw std::invalid_argument("max_seq_len must be positive");
  EncodedSequence seq;
  for (const auto& t : doc.tokens) {
    if (seq.token_ids.size() == max_seq_len) break;
    seq.token_ids.push_back(vocab.id(t.norm));
  }
  if (seq.token_ids.empty()) seq.token_ids.push_back(kOovId);
  seq.length = seq.token_ids.size();
  return seq;
}

}  // namespace bisent
