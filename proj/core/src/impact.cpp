#include "bisent/impact.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {

std::string_view denominator_name(RateDenominator d) {
  return d == RateDenominator::Positive ? "positive" : "all";
}

RateDenominator parse_denominator(std::string_view name) {
  if (name == "positive") return RateDenominator::Positive;
  if (name == "all") return RateDenominator::All;
  throw std::invalid_argument("rate denominator must be 'positive' or 'all'");
}

std::int64_t degree_of_impact(int w, std::int64_t likes, std::int64_t retweets) {
  if (likes < 0 || retweets < 0) throw DataError("likes and retweets must be non-negative");
  return w + likes + retweets;
}

DoIRecord make_doi_record(std::string post_id, int w, std::int64_t likes, std::int64_t retweets) {
  const auto doi = degree_of_impact(w, likes, retweets);
  return {std::move(post_id), w, likes, retweets, doi};
}

std::vector<DoIRecord> impact_records(const Corpus& corpus, std::span<const ScoredPost> scored) {
  std::unordered_map<std::string_view, const RawPost*> by_id;
  for (const auto& post : corpus.posts) by_id.emplace(post.id, &post);
  std::vector<DoIRecord> records;
  records.reserve(scored.size());
  for (const auto& s : scored) {
    const auto it = by_id.find(s.post_id);
    if (it == by_id.end()) throw DataError("scored post '" + s.post_id + "' not found in corpus");
    records.push_back(make_doi_record(s.post_id, class_weight(s.cls), it->second->likes, it->second->retweets));
  }
  return records;
}

RateReport rate(std::string topic, std::span<const DoIRecord> records, RateDenominator denominator) {
  if (records.empty()) throw DataError("no records to rate for topic '" + topic + "'");
  RateReport report;
  report.topic = std::move(topic);
  report.denominator = denominator;
  for (const auto& r : records) {
    report.total_doi += r.doi;
    if (denominator == RateDenominator::All || r.w > 0) ++report.n_pl;
  }
  if (report.n_pl == 0) throw DataError("no positive support measured for topic '" + report.topic + "'");
  report.rate = static_cast<double>(report.total_doi) / static_cast<double>(report.n_pl);
  report.records.assign(records.begin(), records.end());
  return report;
}

std::vector<RateReport> compare_topics(std::vector<RateReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const RateReport& a, const RateReport& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    if (a.total_doi != b.total_doi) return a.total_doi > b.total_doi;
    return a.topic < b.topic;
  });
  return reports;
}

void write_rate_reports(std::span<const RateReport> ranked, std::ostream& out) {
  out << "ranking=";
  for (std::size_t i = 0; i < ranked.size(); ++i) out << (i ? "," : "") << ranked[i].topic;
  out << '\n';
  for (const auto& r : ranked) {
    out << "\ntopic=" << r.topic << "\ndenominator=" << denominator_name(r.denominator) << "\nn_pl=" << r.n_pl
        << "\ntotal_doi=" << r.total_doi << "\nrate=" << format_double(r.rate) << "\nrecords=" << r.records.size()
        << '\n';
    for (const auto& rec : r.records) {
      out << rec.post_id << '\t' << rec.w << '\t' << rec.likes << '\t' << rec.retweets << '\t' << rec.doi << '\n';
    }
  }
}

}  // namespace bisent
