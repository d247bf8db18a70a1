#include "bisent/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {
namespace {

constexpr std::size_t kGridSize = 9;        // 0.40 .. 0.80 step 0.05
constexpr std::size_t kPreferredIndex = 6;  // 0.70

double grid_theta(std::size_t i) { return static_cast<double>(40 + 5 * i) / 100.0; }

bool counts_toward_lexicon(const Token& t, const ScoreOptions& options) {
  if (t.kind == TokenKind::Word) return true;
  return t.kind == TokenKind::Hashtag && !options.excluded_hashtags.contains(t.norm);
}

std::map<std::string, WordStats> count_words(std::span<const Document> positive,
                                             std::span<const Document> negative,
                                             const ScoreOptions& options) {
  std::map<std::string, WordStats> stats;
  for (const auto& doc : positive) {
    for (const auto& t : doc.tokens) {
      if (counts_toward_lexicon(t, options)) ++stats[t.norm].positive;
    }
  }
  for (const auto& doc : negative) {
    for (const auto& t : doc.tokens) {
      if (counts_toward_lexicon(t, options)) ++stats[t.norm].negative;
    }
  }
  return stats;
}

Lexicon assign_scores(const std::map<std::string, WordStats>& counts, double theta, std::int64_t min_count) {
  Lexicon lex;
  lex.theta = theta;
  lex.min_count = min_count;
  for (const auto& [word, s] : counts) {
    const auto n = s.positive + s.negative;
    if (n < min_count || n == 0) continue;
    // q >= theta is p <= 1 - theta without the rounding of 1 - theta.
    const double p = static_cast<double>(s.positive) / static_cast<double>(n);
    const double q = static_cast<double>(s.negative) / static_cast<double>(n);
    int score = 0;
    if (p >= theta) {
      score = 1;
    } else if (q >= theta) {
      score = -1;
    }
    lex.scores.emplace(word, score);
    lex.vocab_stats.emplace(word, s);
  }
  return lex;
}

void check_theta(double theta) {
  if (!(theta >= kMinTheta && theta <= kMaxTheta)) {
    throw std::invalid_argument("theta " + format_double(theta) + " outside [0.4, 0.8]");
  }
}

int sign(std::int64_t v) { return (v > 0) - (v < 0); }

bool is_lower_tag(const std::string& tag) {
  return !tag.empty() && std::none_of(tag.begin(), tag.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || c == '#' || std::isspace(static_cast<unsigned char>(c));
  });
}

}  // namespace

void validate(const SeedSpec& seeds) {
  for (const auto* side : {&seeds.positive_hashtags, &seeds.negative_hashtags}) {
    if (side->size() < 2 || side->size() > 8) {
      throw std::invalid_argument("each seed side needs 2 to 8 hashtags");
    }
    for (const auto& tag : *side) {
      if (!is_lower_tag(tag)) throw std::invalid_argument("seed hashtag '" + tag + "' is not a lowercase tag");
    }
  }
  for (const auto& tag : seeds.positive_hashtags) {
    if (std::find(seeds.negative_hashtags.begin(), seeds.negative_hashtags.end(), tag) !=
        seeds.negative_hashtags.end()) {
      throw std::invalid_argument("seed hashtag '" + tag + "' is on both sides");
    }
  }
  if (!(seeds.upper_polarity_threshold > 0.0 && seeds.upper_polarity_threshold <= 1.0)) {
    throw std::invalid_argument("upper_polarity_threshold must lie in (0, 1]");
  }
}

std::pair<Corpus, Corpus> collect_seed_posts(const Corpus& corpus, const SeedSpec& seeds) {
  validate(seeds);
  const std::set<std::string> pos_tags(seeds.positive_hashtags.begin(), seeds.positive_hashtags.end());
  const std::set<std::string> neg_tags(seeds.negative_hashtags.begin(), seeds.negative_hashtags.end());

  std::pair<Corpus, Corpus> sides{Corpus{corpus.topic, {}}, Corpus{corpus.topic, {}}};
  for (const auto& post : corpus.posts) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& tag : post.hashtags) {
      pos += pos_tags.count(tag);
      neg += neg_tags.count(tag);
    }
    if (pos == neg) continue;
    const auto total = static_cast<double>(pos + neg);
    if (pos > neg && static_cast<double>(pos) / total >= seeds.upper_polarity_threshold) {
      sides.first.posts.push_back(post);
    } else if (neg > pos && static_cast<double>(neg) / total >= seeds.upper_polarity_threshold) {
      sides.second.posts.push_back(post);
    }
  }
  if (sides.first.posts.empty() || sides.second.posts.empty()) {
    throw DataError("insufficient seed coverage: " + std::to_string(sides.first.posts.size()) +
                    " positive and " + std::to_string(sides.second.posts.size()) +
                    " negative seeded posts");
  }
  return sides;
}

Lexicon score_words(std::span<const Document> positive, std::span<const Document> negative, double theta,
                    const ScoreOptions& options) {
  check_theta(theta);
  if (positive.empty() || negative.empty()) throw DataError("lexicon needs posts on both sides");
  return assign_scores(count_words(positive, negative, options), theta, options.min_count);
}

int lookup(const Lexicon& lexicon, std::string_view word) {
  const auto it = lexicon.scores.find(std::string(word));
  return it == lexicon.scores.end() ? 0 : it->second;
}

std::int64_t document_score(const Document& doc, const Lexicon& lexicon) {
  std::int64_t p = 0;
  for (const auto& t : doc.tokens) {
    if (t.kind == TokenKind::Word || t.kind == TokenKind::Hashtag) p += lookup(lexicon, t.norm);
  }
  return p;
}

std::vector<double> theta_grid() {
  std::vector<double> grid(kGridSize);
  for (std::size_t i = 0; i < kGridSize; ++i) grid[i] = grid_theta(i);
  return grid;
}

Calibration calibrate_theta(std::span<const Document> positive, std::span<const Document> negative,
                            std::span<const Document> holdout, std::span<const SentimentClass> holdout_gold,
                            const ScoreOptions& options) {
  if (holdout.empty()) throw DataError("calibration holdout is empty");
  if (holdout.size() != holdout_gold.size()) throw DataError("holdout and gold labels differ in size");
  if (positive.empty() || negative.empty()) throw DataError("lexicon needs posts on both sides");

  const auto counts = count_words(positive, negative, options);
  Calibration result;
  std::size_t best = 0;
  for (std::size_t i = 0; i < kGridSize; ++i) {
    const auto lex = assign_scores(counts, grid_theta(i), options.min_count);
    ThetaTrial trial{lex.theta, 0};
    for (std::size_t k = 0; k < holdout.size(); ++k) {
      if (sign(document_score(holdout[k], lex)) != sign(class_weight(holdout_gold[k]))) ++trial.errors;
    }
    result.trials.push_back(trial);
    const auto dist = [](std::size_t j) { return j > kPreferredIndex ? j - kPreferredIndex : kPreferredIndex - j; };
    const auto& incumbent = result.trials[best];
    if (trial.errors < incumbent.errors || (trial.errors == incumbent.errors && dist(i) < dist(best))) {
      best = i;
    }
  }
  result.theta = result.trials[best].theta;
  return result;
}

Calibration calibrate_theta(std::span<const Document> positive, std::span<const Document> negative,
                            const Corpus& holdout, const PreprocessOptions& preprocess_options,
                            const ScoreOptions& options) {
  std::vector<Document> docs;
  std::vector<SentimentClass> gold;
  for (const auto& post : holdout.posts) {
    if (!post.gold_class) throw DataError("holdout post '" + post.id + "' has no gold_class");
    docs.push_back(preprocess(post, preprocess_options));
    gold.push_back(*post.gold_class);
  }
  return calibrate_theta(positive, negative, docs, gold, options);
}

void write_lexicon(const Lexicon& lexicon, std::ostream& out) {
  out << "#lexicon\ttheta=" << format_double(lexicon.theta) << "\tmin_count=" << lexicon.min_count << '\n';
  for (const auto& [word, score] : lexicon.scores) {
    const auto it = lexicon.vocab_stats.find(word);
    const WordStats s = it == lexicon.vocab_stats.end() ? WordStats{} : it->second;
    out << word << '\t' << score << '\t' << s.positive << '\t' << s.negative << '\n';
  }
}

Lexicon read_lexicon(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("lexicon file is empty");
  const auto header = split(line, '\t');
  if (header.size() != 3 || header[0] != "#lexicon" || !header[1].starts_with("theta=") ||
      !header[2].starts_with("min_count=")) {
    throw DataError("bad lexicon header");
  }
  Lexicon lex;
  lex.theta = parse_double(std::string_view(header[1]).substr(6));
  lex.min_count = parse_int(std::string_view(header[2]).substr(10));
  check_theta(lex.theta);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split(line, '\t');
    const auto where = "lexicon line " + std::to_string(line_no);
    if (fields.size() != 4 || fields[0].empty()) throw DataError(where + ": expected 4 fields");
    const auto score = parse_int(fields[1]);
    if (score < -1 || score > 1) throw DataError(where + ": score out of range");
    WordStats s{parse_int(fields[2]), parse_int(fields[3])};
    if (s.positive < 0 || s.negative < 0) throw DataError(where + ": negative count");
    if (!lex.scores.emplace(fields[0], static_cast<int>(score)).second) {
      throw DataError(where + ": duplicate word");
    }
    lex.vocab_stats.emplace(fields[0], s);
  }
  return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write lexicon " + path.string());
  write_lexicon(lexicon, out);
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  return read_lexicon(in);
}

}  // namespace bisent
