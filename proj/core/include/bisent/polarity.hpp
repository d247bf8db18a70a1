#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bisent/lexicon.hpp"
#include "bisent/preprocess.hpp"
#include "bisent/sentiment_class.hpp"

namespace bisent {

struct PolarityScore {
  std::string post_id;
  std::int64_t p = 0;         // sum of word scores
  std::int64_t n_scored = 0;  // tokens with a nonzero score

  bool operator==(const PolarityScore&) const = default;
};

struct PolarityOptions {
  // Score multiplier for capitalised or elongated tokens. 1 leaves them as is.
  int emphasis_multiplier = 1;
};

PolarityScore message_polarity(const Document& doc, const Lexicon& lexicon,
                               const PolarityOptions& options = {});

// |p| >= strong -> Strong, >= moderate -> Moderate, >= weak -> Weak, else
// Neutral; the sign of p picks the side. The defaults make the class weight
// sign(p) * min(|p|, 3).
struct BucketThresholds {
  std::int64_t weak = 1;
  std::int64_t moderate = 2;
  std::int64_t strong = 3;
};

SentimentClass bucket(std::int64_t p, const BucketThresholds& thresholds = {});
inline SentimentClass bucket(const PolarityScore& score, const BucketThresholds& thresholds = {}) {
  return bucket(score.p, thresholds);
}

// One classified post, as written to the scored-post file:
//   post_id<TAB>p<TAB>class<TAB>weight
struct ScoredPost {
  std::string post_id;
  std::int64_t p = 0;
  SentimentClass cls = SentimentClass::Neutral;

  bool operator==(const ScoredPost&) const = default;
};

void write_scored_posts(std::span<const ScoredPost> posts, std::ostream& out);
std::vector<ScoredPost> read_scored_posts(std::istream& in);
void save_scored_posts(std::span<const ScoredPost> posts, const std::filesystem::path& path);
std::vector<ScoredPost> load_scored_posts(const std::filesystem::path& path);

}  // namespace bisent
