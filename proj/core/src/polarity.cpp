#include "bisent/polarity.hpp"

#include <fstream>
#include <stdexcept>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {

PolarityScore message_polarity(const Document& doc, const Lexicon& lexicon, const PolarityOptions& options) {
  PolarityScore score{doc.post_id, 0, 0};
  for (const auto& t : doc.tokens) {
    if (t.kind != TokenKind::Word && t.kind != TokenKind::Hashtag) continue;
    const int s = lookup(lexicon, t.norm);
    if (s == 0) continue;
    score.p += t.emphasis ? s * options.emphasis_multiplier : s;
    ++score.n_scored;
  }
  return score;
}

SentimentClass bucket(std::int64_t p, const BucketThresholds& thresholds) {
  if (!(0 < thresholds.weak && thresholds.weak <= thresholds.moderate && thresholds.moderate <= thresholds.strong)) {
    throw std::invalid_argument("bucket thresholds must satisfy 0 < weak <= moderate <= strong");
  }
  const std::int64_t magnitude = p < 0 ? -p : p;
  int level = 0;
  if (magnitude >= thresholds.strong) {
    level = 3;
  } else if (magnitude >= thresholds.moderate) {
    level = 2;
  } else if (magnitude >= thresholds.weak) {
    level = 1;
  }
  return class_from_weight(p < 0 ? -level : level);
}

void write_scored_posts(std::span<const ScoredPost> posts, std::ostream& out) {
  for (const auto& s : posts) {
    out << s.post_id << '\t' << s.p << '\t' << class_name(s.cls) << '\t' << class_weight(s.cls) << '\n';
  }
}

std::vector<ScoredPost> read_scored_posts(std::istream& in) {
  std::vector<ScoredPost> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = "scored-post line " + std::to_string(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() != 4 || fields[0].empty()) throw DataError(where + ": expected 4 fields");
    const auto cls = parse_class(fields[2]);
    if (!cls) throw DataError(where + ": unknown class '" + fields[2] + "'");
    if (parse_int(fields[3]) != class_weight(*cls)) throw DataError(where + ": weight does not match class");
    posts.push_back({fields[0], parse_int(fields[1]), *cls});
  }
  return posts;
}

void save_scored_posts(std::span<const ScoredPost> posts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_scored_posts(posts, out);
}

std::vector<ScoredPost> load_scored_posts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scored-post file " + path.string());
  return read_scored_posts(in);
}

}  // namespace bisent
