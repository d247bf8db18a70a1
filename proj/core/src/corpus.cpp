#include "bisent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bisent/error.hpp"
#include "bisent/random.hpp"

namespace bisent {
namespace {

using ordered_json = nlohmann::ordered_json;

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_tag_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

std::string normalize_hashtag(std::string_view tag) {
  if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  std::string out(tag);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> hashtags_in_text(std::string_view text) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_tag_char(text[j])) ++j;
    if (j > i + 1) tags.push_back(normalize_hashtag(text.substr(i + 1, j - i - 1)));
    i = j - 1;
  }
  return tags;
}

std::int64_t read_count(const ordered_json& record, const char* key) {
  if (!record.contains(key)) return 0;
  const auto& v = record.at(key);
  if (!v.is_number_integer()) throw DataError(std::string("field '") + key + "' is not an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 0) throw DataError(std::string("negative ") + key);
  return n;
}

}  // namespace

RawPost parse_post(std::string_view line) {
  ordered_json record;
  try {
    record = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  if (!record.is_object()) throw DataError("record is not an object");

  RawPost post;
  for (const char* key : {"id", "text"}) {
    if (!record.contains(key)) throw DataError(std::string("missing required field '") + key + "'");
    if (!record.at(key).is_string()) throw DataError(std::string("field '") + key + "' is not a string");
  }
  post.id = record.at("id").get<std::string>();
  post.text = record.at("text").get<std::string>();
  if (post.id.empty()) throw DataError("empty id");
  if (code_points(post.text) > kMaxPostLength) throw DataError("text longer than 280 characters");

  if (record.contains("hashtags")) {
    const auto& tags = record.at("hashtags");
    if (!tags.is_array()) throw DataError("field 'hashtags' is not a list");
    for (const auto& t : tags) {
      if (!t.is_string()) throw DataError("hashtag is not a string");
      auto tag = normalize_hashtag(t.get<std::string>());
      if (!tag.empty()) post.hashtags.push_back(std::move(tag));
    }
  } else {
    post.hashtags = hashtags_in_text(post.text);
  }
  post.likes = read_count(record, "likes");
  post.retweets = read_count(record, "retweets");

  if (record.contains("gold_class") && !record.at("gold_class").is_null()) {
    const auto& g = record.at("gold_class");
    if (!g.is_string()) throw DataError("field 'gold_class' is not a string");
    const auto cls = parse_class(g.get<std::string>());
    if (!cls) throw DataError("unknown gold_class '" + g.get<std::string>() + "'");
    post.gold_class = *cls;
  }
  return post;
}

std::string serialize_post(const RawPost& post) {
  ordered_json record;
  record["id"] = post.id;
  record["text"] = post.text;
  record["hashtags"] = post.hashtags;
  record["likes"] = post.likes;
  record["retweets"] = post.retweets;
  if (post.gold_class) record["gold_class"] = std::string(class_name(*post.gold_class));
  return record.dump();
}

LoadResult read_corpus(std::istream& in, std::string topic) {
  LoadResult result;
  result.corpus.topic = std::move(topic);
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      auto post = parse_post(line);
      if (!seen.insert(post.id).second) throw DataError("duplicate id '" + post.id + "'");
      result.corpus.posts.push_back(std::move(post));
    } catch (const DataError& e) {
      result.rejects.push_back({line_no, e.what()});
    }
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return read_corpus(in, path.stem().string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& post : corpus.posts) out << serialize_post(post) << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(corpus, out);
  if (!out) throw DataError("write failed for " + path.string());
}

std::string dedupe_key(std::string_view text) {
  std::string key;
  key.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending_space = !key.empty();
      continue;
    }
    if (pending_space) key.push_back(' ');
    pending_space = false;
    key.push_back(static_cast<char>(std::tolower(u)));
  }
  return key;
}

Corpus dedupe(const Corpus& corpus) {
  Corpus out{corpus.topic, {}};
  std::unordered_set<std::string> seen;
  for (const auto& post : corpus.posts) {
    if (seen.insert(dedupe_key(post.text)).second) out.posts.push_back(post);
  }
  return out;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.posts.empty()) throw DataError("cannot split an empty corpus");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.posts.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  const auto cut = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < cut; ++i) in_train[order[i]] = true;

  std::pair<Corpus, Corpus> parts{Corpus{corpus.topic, {}}, Corpus{corpus.topic, {}}};
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? parts.first : parts.second).posts.push_back(corpus.posts[i]);
  }
  return parts;
}

SynthConfig default_synth_config() {
  SynthConfig c;
  c.topic = "synthetic";
  c.positive_words = {
      "good",      "great",   "happy",    "love",     "super",    "proud",   "brave",
      "glory",     "best",    "awesome",  "excellent", "wonderful", "amazing", "brilliant",
      "strong",    "honor",   "joy",      "win",      "pride",    "heritage", "beautiful",
      "fantastic", "superb",  "nice",     "kind",     "bright",   "hope",    "trust",
      "respect",   "cheer",   "smile",    "praise",   "perfect",  "gentle",  "grand",
      "noble",     "loyal",   "fair",     "fresh",    "calm",     "bold",    "glorious",
      "delight",   "triumph", "thrill",   "valiant",  "splendid", "cool",    "sweet",
      "worthy",
  };
  c.negative_words = {
      "bad",     "cruel",  "danger", "risky",    "harm",    "pain",     "sad",
      "angry",   "hate",   "worst",  "awful",    "terrible", "horrible", "brutal",
      "unsafe",  "wrong",  "evil",   "fear",     "shame",   "ugly",     "nasty",
      "poor",    "weak",   "violent", "deadly",  "toxic",   "abuse",    "torture",
      "injury",  "suffer", "tragic", "disaster", "misery",  "grief",    "threat",
      "panic",   "chaos",  "crime",  "corrupt",  "greedy",  "rude",     "bitter",
      "gloomy",  "dread",  "fail",   "agony",    "hurt",    "wound",    "horror",
      "savage",
  };
  c.neutral_words = {
      "people", "today",   "event",  "village", "bull",    "temple",  "festival", "street",
      "team",   "crowd",   "market", "river",   "town",    "morning", "evening",  "game",
      "field",  "city",    "day",    "week",    "video",   "photo",   "school",   "student",
      "time",   "year",    "place",  "road",    "bus",     "train",   "house",    "family",
      "friend", "state",   "court",  "police",  "rule",    "law",     "sport",    "culture",
      "farmer", "animal",  "ground", "ticket",  "stage",   "report",  "minister", "govt",
      "party",  "leader",  "office", "meeting", "tamil",   "nadu",    "chennai",  "madurai",
      "season", "pongal",  "month",  "hour",    "minute",  "watch",   "look",     "talk",
      "share",  "follow",  "update", "channel", "paper",   "story",   "point",    "side",
      "topic",  "thread",  "page",   "link",    "post",    "comment", "reply",    "question",
  };
  c.positive_hashtags = {"tamizhanhistory", "tamizhanidentity", "tamizhansuper", "tamizhangethu"};
  c.negative_hashtags = {"jallikatunotsafe", "lifesuckingjallikatu", "riskyjallikatu",
                         "dangerousjallikatu"};
  c.neutral_hashtags = {"jallikattu", "pongal2017", "tamilnadu"};
  return c;
}

namespace {

const std::string& pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[static_cast<std::size_t>(rng.index(pool.size()))];
}

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.index(hi - lo + 1));
}

std::string emphasize(const std::string& word) {
  std::string out = word;
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void check_config(const SynthConfig& c) {
  if (c.positive_words.empty() || c.negative_words.empty()) {
    throw std::invalid_argument("synthetic corpus needs non-empty positive and negative word pools");
  }
  if (c.neutral_words.empty() && c.max_filler_words > 0) {
    throw std::invalid_argument("filler words requested but the neutral pool is empty");
  }
  if (c.positive_share < 0 || c.negative_share < 0 || c.positive_share + c.negative_share > 1.0 + 1e-12) {
    throw std::invalid_argument("polarity shares must be non-negative and sum to at most 1");
  }
  if (c.min_sentiment_words < 1 || c.min_sentiment_words > c.max_sentiment_words) {
    throw std::invalid_argument("sentiment word range must satisfy 1 <= min <= max");
  }
  if (c.min_filler_words > c.max_filler_words) throw std::invalid_argument("filler range min > max");
  if (c.hashtag_rate > 0 && (c.positive_hashtags.empty() || c.negative_hashtags.empty())) {
    throw std::invalid_argument("hashtag_rate > 0 needs seed hashtags on both sides");
  }
  if (c.topic_hashtag_rate > 0 && c.neutral_hashtags.empty()) {
    throw std::invalid_argument("topic_hashtag_rate > 0 needs neutral hashtags");
  }
  if (c.likes_mean < 0 || c.retweets_mean < 0) throw std::invalid_argument("negative count mean");
}

}  // namespace

Corpus synth_corpus(const SynthConfig& config, std::uint64_t seed) {
  check_config(config);
  Rng rng(seed);

  const auto n = config.num_posts;
  const auto n_pos = static_cast<std::size_t>(std::llround(config.positive_share * static_cast<double>(n)));
  const auto n_neg = std::min(n - std::min(n, n_pos),
                              static_cast<std::size_t>(std::llround(config.negative_share * static_cast<double>(n))));
  std::vector<int> sides;
  sides.reserve(n);
  sides.insert(sides.end(), std::min(n, n_pos), +1);
  sides.insert(sides.end(), n_neg, -1);
  sides.resize(n, 0);
  rng.shuffle(sides);

  Corpus corpus{config.topic, {}};
  corpus.posts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int side = sides[i];
    std::vector<std::string> words;
    std::vector<std::string> tags;
    int signed_count = 0;

    if (side != 0) {
      const auto& own = side > 0 ? config.positive_words : config.negative_words;
      const auto& other = side > 0 ? config.negative_words : config.positive_words;
      const auto k = draw_between(rng, config.min_sentiment_words, config.max_sentiment_words);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& w = pick(rng, own);
        words.push_back(rng.bernoulli(config.emphasis_rate) ? emphasize(w) : w);
      }
      signed_count = side * static_cast<int>(k);
      if (config.ambiguity_rate > 0 && rng.bernoulli(config.ambiguity_rate)) {
        words.push_back(pick(rng, other));
        signed_count -= side;
      }
      if (config.hashtag_rate > 0 && rng.bernoulli(config.hashtag_rate)) {
        tags.push_back(pick(rng, side > 0 ? config.positive_hashtags : config.negative_hashtags));
      }
    }
    const auto fillers = draw_between(rng, config.min_filler_words, config.max_filler_words);
    for (std::size_t j = 0; j < fillers; ++j) words.push_back(pick(rng, config.neutral_words));
    if (config.topic_hashtag_rate > 0 && rng.bernoulli(config.topic_hashtag_rate)) {
      tags.push_back(pick(rng, config.neutral_hashtags));
    }
    rng.shuffle(words);

    std::string text;
    for (const auto& w : words) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    }
    for (const auto& t : tags) {
      if (!text.empty()) text.push_back(' ');
      text += '#' + t;
    }

    RawPost post;
    post.id = "s" + std::to_string(i + 1);
    post.text = std::move(text);
    post.hashtags = std::move(tags);
    post.likes = static_cast<std::int64_t>(rng.geometric(config.likes_mean));
    post.retweets = static_cast<std::int64_t>(rng.geometric(config.retweets_mean));
    const int weight = std::clamp(signed_count, -3, 3);
    post.gold_class = class_from_weight(weight);
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

}  // namespace bisent
