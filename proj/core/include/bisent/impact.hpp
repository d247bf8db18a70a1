#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bisent/corpus.hpp"
#include "bisent/polarity.hpp"

namespace bisent {

struct DoIRecord {
  std::string post_id;
  int w = 0;  // class weight
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::int64_t doi = 0;  // w + likes + retweets

  bool operator==(const DoIRecord&) const = default;
};

// Which posts count in the rate denominator: those with a positive class
// weight, or every post about the topic.
enum class RateDenominator { Positive, All };

std::string_view denominator_name(RateDenominator d);
RateDenominator parse_denominator(std::string_view name);  // throws std::invalid_argument

struct RateReport {
  std::string topic;
  std::int64_t total_doi = 0;
  std::int64_t n_pl = 0;
  double rate = 0.0;
  RateDenominator denominator = RateDenominator::Positive;
  std::vector<DoIRecord> records;
};

// Weight plus likes plus retweets. Throws DataError on negative counts.
std::int64_t degree_of_impact(int w, std::int64_t likes, std::int64_t retweets);

DoIRecord make_doi_record(std::string post_id, int w, std::int64_t likes, std::int64_t retweets);

// Pairs each scored post with its likes and retweets from the corpus.
// Throws DataError if a scored id is missing from the corpus.
std::vector<DoIRecord> impact_records(const Corpus& corpus, std::span<const ScoredPost> scored);

// total_doi / n_pl. Throws DataError for no records, and
// "no positive support measured" when the denominator is zero.
RateReport rate(std::string topic, std::span<const DoIRecord> records,
                RateDenominator denominator = RateDenominator::Positive);

// Descending rate, then descending total_doi, then topic name.
std::vector<RateReport> compare_topics(std::vector<RateReport> reports);

// Ranking line followed by one block per report:
//   ranking=<topic>,<topic>,...
//
//   topic=<topic>
//   denominator=positive|all
//   n_pl=<n>
//   total_doi=<n>
//   rate=<rate>
//   records=<count>
//   <post_id><TAB><w><TAB><likes><TAB><retweets><TAB><doi>
void write_rate_reports(std::span<const RateReport> ranked, std::ostream& out);

}  // namespace bisent
