#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bisent/corpus.hpp"
#include "bisent/preprocess.hpp"

namespace bisent {

inline constexpr double kMinTheta = 0.4;
inline constexpr double kMaxTheta = 0.8;
inline constexpr double kDefaultTheta = 0.7;

struct SeedSpec {
  std::vector<std::string> positive_hashtags;
  std::vector<std::string> negative_hashtags;
  // Share of a post's seed hashtags that must come from one side for the
  // post to join it. 1.0 means any hashtag from the other side excludes it.
  double upper_polarity_threshold = 1.0;
};

// Throws std::invalid_argument: each side needs 2..8 lowercase tags, the
// sides must be disjoint and the threshold in (0, 1].
void validate(const SeedSpec& seeds);

// (positive-seeded, negative-seeded) sub-corpora. A post joins a side when
// it has at least one of that side's hashtags, strictly more than of the
// other side's, and that side's share reaches upper_polarity_threshold.
// Throws DataError("insufficient seed coverage ...") if either side is empty.
std::pair<Corpus, Corpus> collect_seed_posts(const Corpus& corpus, const SeedSpec& seeds);

struct WordStats {
  std::int64_t positive = 0;
  std::int64_t negative = 0;

  bool operator==(const WordStats&) const = default;
};

struct Lexicon {
  std::map<std::string, int> scores;  // -1, 0 or +1
  std::map<std::string, WordStats> vocab_stats;
  double theta = kDefaultTheta;
  std::int64_t min_count = 3;

  bool operator==(const Lexicon&) const = default;
};

struct ScoreOptions {
  std::int64_t min_count = 3;
  // Hashtag norms that never enter the lexicon (the seed hashtags).
  std::set<std::string> excluded_hashtags;
};

// Counts word and hashtag occurrences on each side. For a word seen
// n >= min_count times with positive share p: +1 if p >= theta, -1 if
// p <= 1 - theta, 0 otherwise. Throws std::invalid_argument for theta
// outside [0.4, 0.8] and DataError when either side is empty.
Lexicon score_words(std::span<const Document> positive, std::span<const Document> negative,
                    double theta, const ScoreOptions& options = {});

// Score of a word; unknown words score 0.
int lookup(const Lexicon& lexicon, std::string_view word);

// Sum of word scores over the word and hashtag tokens of a document.
std::int64_t document_score(const Document& doc, const Lexicon& lexicon);

struct ThetaTrial {
  double theta = 0.0;
  std::size_t errors = 0;  // holdout posts whose score sign disagrees with gold
};

struct Calibration {
  double theta = kDefaultTheta;
  std::vector<ThetaTrial> trials;  // the full grid, ascending theta
};

// The grid 0.40, 0.45, ..., 0.80.
std::vector<double> theta_grid();

// Builds a lexicon for every grid theta and counts holdout sign errors.
// Returns the theta with the fewest errors; ties go to the one closest to
// 0.70. Throws DataError if the holdout is empty or sizes differ.
Calibration calibrate_theta(std::span<const Document> positive, std::span<const Document> negative,
                            std::span<const Document> holdout,
                            std::span<const SentimentClass> holdout_gold,
                            const ScoreOptions& options = {});

// Corpus-level form; throws DataError if any holdout post lacks gold_class.
Calibration calibrate_theta(std::span<const Document> positive, std::span<const Document> negative,
                            const Corpus& holdout, const PreprocessOptions& preprocess_options,
                            const ScoreOptions& options = {});

// Lexicon file:
//   #lexicon<TAB>theta=<theta><TAB>min_count=<n>
//   <word><TAB><score><TAB><positive count><TAB><negative count>
// one line per word in byte order.
void write_lexicon(const Lexicon& lexicon, std::ostream& out);
Lexicon read_lexicon(std::istream& in);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
Lexicon load_lexicon(const std::filesystem::path& path);

}  // namespace bisent
