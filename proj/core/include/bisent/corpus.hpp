#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bisent/sentiment_class.hpp"

namespace bisent {

// Longest accepted post text, in code points.
inline constexpr std::size_t kMaxPostLength = 280;

struct RawPost {
  std::string id;
  std::string text;
  std::vector<std::string> hashtags;  // lowercase, without '#'
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::optional<SentimentClass> gold_class;

  bool operator==(const RawPost&) const = default;
};

// All posts about one item of interest.
struct Corpus {
  std::string topic;
  std::vector<RawPost> posts;

  bool operator==(const Corpus&) const = default;
};

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadResult {
  Corpus corpus;
  std::vector<RejectedLine> rejects;
};

// Corpus files hold one JSON object per line:
//   {"id":"p1","text":"...","hashtags":["a"],"likes":0,"retweets":0,"gold_class":"weak_pos"}
// id and text are required; the rest default to empty/0/absent. Lines that
// fail to parse, miss a required field, carry a negative count, exceed the
// length cap or repeat an earlier id are returned as rejects. Blank lines
// are skipped.
LoadResult load_corpus(const std::filesystem::path& path);
LoadResult read_corpus(std::istream& in, std::string topic);

// Parses one record. Throws DataError with the reason on failure.
RawPost parse_post(std::string_view line);
std::string serialize_post(const RawPost& post);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Case-folded, whitespace-collapsed, trimmed text.
std::string dedupe_key(std::string_view text);

// Keeps the first post for each dedupe_key; order otherwise preserved.
Corpus dedupe(const Corpus& corpus);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then cut at round(train_fraction * N). Both halves keep
// the corpus order of their posts. Throws DataError on an empty corpus and
// std::invalid_argument for a fraction outside (0, 1).
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

// Settings for the synthetic labelled corpus.
struct SynthConfig {
  std::string topic = "synthetic";
  std::vector<std::string> positive_words;
  std::vector<std::string> negative_words;
  std::vector<std::string> neutral_words;
  std::vector<std::string> positive_hashtags;
  std::vector<std::string> negative_hashtags;
  std::vector<std::string> neutral_hashtags;

  std::size_t num_posts = 1000;
  double positive_share = 0.5;
  double negative_share = 0.5;  // neutral posts take the remainder

  double hashtag_rate = 0.9;        // P(post carries a seed hashtag of its side)
  double topic_hashtag_rate = 0.5;  // P(post carries a neutral hashtag)
  double ambiguity_rate = 0.0;      // P(polar post also gets one opposite-pool word)
  double emphasis_rate = 0.1;       // P(a sentiment word is written in capitals)

  std::size_t min_sentiment_words = 1;
  std::size_t max_sentiment_words = 4;
  std::size_t min_filler_words = 2;
  std::size_t max_filler_words = 6;

  double likes_mean = 5.0;
  double retweets_mean = 2.0;
};

// Built-in 50-word polarity pools, filler words and seed hashtags shaped
// after the support/oppose hashtag pairs of a topical campaign.
SynthConfig default_synth_config();

// Each post draws its sentiment words from exactly one pool (unless the
// ambiguity knob fires) and records gold class bucket(#own - #opposite).
// Throws std::invalid_argument for empty pools or inconsistent settings.
Corpus synth_corpus(const SynthConfig& config, std::uint64_t seed);

}  // namespace bisent
