#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "bisent/corpus.hpp"
#include "bisent/preprocess.hpp"
#include "bisent/random.hpp"

using namespace bisent;

namespace {

std::vector<std::pair<TokenKind, std::string>> kinds(std::string_view text) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const auto& t : tokenize(text)) out.emplace_back(t.kind, t.norm);
  return out;
}

Token word(std::string s) { return normalize(Token{s, "", TokenKind::Word, false}); }

Document words_doc(std::initializer_list<const char*> ws) {
  Document d;
  for (const auto* w : ws) d.tokens.push_back(word(w));
  return d;
}

bool has_triple_run(const std::string& s) {
  for (std::size_t i = 2; i < s.size(); ++i) {
    if (std::isalpha(static_cast<unsigned char>(s[i])) && s[i] == s[i - 1] && s[i] == s[i - 2]) return true;
  }
  return false;
}

// Random byte strings biased toward the characters the tokenizer cares about
// plus multi-byte and broken UTF-8.
std::string random_text(Rng& rng) {
  static const std::vector<std::string> atoms = {
      "a", "Z", "o", "#", "@", ":", ")", "(", "<", ">", "/", "&", ";", "'", "-", "+", ".", ",", "1", "9",
      " ", "\t", "\n", "http://", "www.", "&amp;", "<b>", ":-)", "\xc3\xa9", "\xe0\xae\xa4",
      "\xf0\x9f\x98\x80", "\xff", "\xc3", "\xe2\x82", "\x80", std::string(1, '\0'), "\xed\xa0\x80"};
  std::string s;
  const auto len = rng.index(40);
  for (std::uint64_t i = 0; i < len; ++i) {
    if (rng.bernoulli(0.2)) {
      s.push_back(static_cast<char>(rng.index(256)));
    } else {
      s += atoms[rng.index(atoms.size())];
    }
  }
  return s;
}

// Surfaces tile the non-whitespace characters of the text in order.
bool tiles(std::string_view text, const std::vector<Token>& tokens) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < text.size() && std::string_view(" \t\n\r\f\v").find(text[pos]) != std::string_view::npos) ++pos;
  };
  for (const auto& t : tokens) {
    skip_space();
    if (t.surface.empty() || text.substr(pos, t.surface.size()) != t.surface) return false;
    pos += t.surface.size();
  }
  skip_space();
  return pos == text.size();
}

}  // namespace

TEST(Tokenize, HashtagThenWord) {
  const auto toks = tokenize("#tamizhan super");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].kind, TokenKind::Hashtag);
  EXPECT_EQ(toks[0].norm, "tamizhan");
  EXPECT_EQ(toks[1].kind, TokenKind::Word);
  EXPECT_EQ(toks[1].norm, "super");
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, EmphasisEmoticonUrl) {
  const auto toks = tokenize("GOOOOD :) http://t.co/x");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].kind, TokenKind::Word);
  EXPECT_EQ(toks[0].norm, "good");
  EXPECT_TRUE(toks[0].emphasis);
  EXPECT_EQ(toks[1].kind, TokenKind::Emoticon);
  EXPECT_EQ(toks[1].norm, ":)");
  EXPECT_EQ(toks[2].kind, TokenKind::Url);
  EXPECT_EQ(toks[2].surface, "http://t.co/x");
}

TEST(Tokenize, PrecedenceTable) {
  using K = TokenKind;
  EXPECT_EQ(kinds("<br/> &amp; @Fan_1 +91-98765-43210"),
            (std::vector<std::pair<K, std::string>>{{K::HtmlTag, "<br/>"},
                                                    {K::HtmlTag, "&amp;"},
                                                    {K::Mention, "fan_1"},
                                                    {K::Phone, "+91-98765-43210"}}));
  EXPECT_EQ(kinds("call 044-2345-6789 or 555-1234 now"),
            (std::vector<std::pair<K, std::string>>{{K::Word, "call"},
                                                    {K::Phone, "044-2345-6789"},
                                                    {K::Word, "or"},
                                                    {K::Phone, "555-1234"},
                                                    {K::Word, "now"}}));
  EXPECT_EQ(kinds("3.5 1,000 don't <3 ..."),
            (std::vector<std::pair<K, std::string>>{{K::Number, "3.5"},
                                                    {K::Number, "1,000"},
                                                    {K::Word, "don't"},
                                                    {K::Emoticon, "<3"},
                                                    {K::Symbol, "."},
                                                    {K::Symbol, "."},
                                                    {K::Symbol, "."}}));
  EXPECT_EQ(kinds("www.example.com/a?b #x:)"),
            (std::vector<std::pair<K, std::string>>{{K::Url, "www.example.com/a?b"},
                                                    {K::Hashtag, "x"},
                                                    {K::Emoticon, ":)"}}));
}

TEST(Tokenize, EmoticonNotFollowedByLetters) {
  using K = TokenKind;
  EXPECT_EQ(kinds(":Dog"), (std::vector<std::pair<K, std::string>>{{K::Symbol, ":"}, {K::Word, "dog"}}));
}

TEST(Tokenize, EmoticonListIsLongestFirst) {
  const auto list = emoticons();
  for (std::size_t i = 0; i < list.size(); ++i) {
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      // a later entry is never a proper extension of an earlier one
      EXPECT_FALSE(list[j].size() > list[i].size() && list[j].substr(0, list[i].size()) == list[i])
          << list[i] << " shadows " << list[j];
    }
  }
}

TEST(Tokenize, MultiByteSymbolsStayWhole) {
  const auto toks = tokenize("\xe0\xae\xa4\xe0\xae\xae\xe0\xae\xbf\xe0\xae\xb4\xe0\xaf\x8d");
  EXPECT_EQ(toks.size(), 5u);
  for (const auto& t : toks) EXPECT_EQ(t.kind, TokenKind::Symbol);
}

TEST(Tokenize, FuzzIsTotalAndTiles) {
  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto text = random_text(rng);
    std::vector<Token> toks;
    ASSERT_NO_THROW(toks = tokenize(text));
    ASSERT_TRUE(tiles(text, toks)) << "text #" << i;
  }
}

TEST(Normalize, Examples) {
  const auto happy = word("Happy");
  EXPECT_EQ(happy.norm, "happy");
  EXPECT_FALSE(happy.emphasis);
  const auto so = word("soooo");
  EXPECT_EQ(so.norm, "soo");
  EXPECT_TRUE(so.emphasis);
  const auto ok = word("OK");
  EXPECT_EQ(ok.norm, "ok");
  EXPECT_TRUE(ok.emphasis);
  EXPECT_FALSE(word("I").emphasis);
  EXPECT_EQ(word("good").norm, "good");
  EXPECT_FALSE(word("good").emphasis);
}

TEST(Normalize, HashtagAndMentionDropSigil) {
  EXPECT_EQ(normalize(Token{"#JALLIKATTUUU", "", TokenKind::Hashtag, false}).norm, "jallikattuu");
  EXPECT_EQ(normalize(Token{"@Fan", "", TokenKind::Mention, false}).norm, "fan");
  EXPECT_EQ(normalize(Token{":D", "", TokenKind::Emoticon, false}).norm, ":D");
}

TEST(Normalize, Idempotent) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    for (const auto& t : tokenize(random_text(rng))) EXPECT_EQ(normalize(normalize(t)), normalize(t));
  }
}

TEST(Stem, RuleTable) {
  EXPECT_EQ(stem("ponies"), "pony");
  EXPECT_EQ(stem("run"), "run");
  EXPECT_EQ(stem("playing"), "play");
  EXPECT_EQ(stem("classes"), "class");
  EXPECT_EQ(stem("likes"), "lik");
  EXPECT_EQ(stem("cats"), "cat");
  EXPECT_EQ(stem("glass"), "glass");
  EXPECT_EQ(stem("status"), "status");
  EXPECT_EQ(stem("jumped"), "jump");
  EXPECT_EQ(stem("red"), "red");
  EXPECT_EQ(stem("sing"), "sing");
  EXPECT_EQ(stem("is"), "is");
  EXPECT_EQ(stem("uses"), "use");
  EXPECT_EQ(stem("jallikattuu"), "jallikattuu");
}

TEST(Stem, IdempotentOnSyntheticVocabulary) {
  // Roots avoid d, g and s so no root ends in a suffix the table strips.
  const std::string consonants = "bcfhjklmnpqrtvwxz";
  const std::string vowels = "aeiouy";
  const std::vector<std::string> suffixes = {"", "ies", "sses", "es", "s", "ing", "ed", "y"};
  Rng rng(77);
  std::set<std::string> vocab;
  while (vocab.size() < 5000) {
    std::string root;
    const auto len = 2 + rng.index(6);
    for (std::uint64_t i = 0; i < len; ++i) {
      root += i % 2 == 0 ? consonants[rng.index(consonants.size())] : vowels[rng.index(vowels.size())];
    }
    vocab.insert(root + suffixes[rng.index(suffixes.size())]);
  }
  for (const auto& w : vocab) {
    const auto once = stem(w);
    EXPECT_EQ(stem(once), once) << w;
  }
}

TEST(Filter, UrlOnlyDocBecomesEmpty) {
  Document d{"x", tokenize("http://t.co/abc")};
  EXPECT_TRUE(filter(d, {}).tokens.empty());
}

TEST(Filter, StopWords) {
  const auto out = filter(words_doc({"the", "good"}), {"the"});
  ASSERT_EQ(out.tokens.size(), 1u);
  EXPECT_EQ(out.tokens[0].norm, "good");
}

TEST(Filter, ExpansionAppendsAfterSource) {
  const auto out = filter(words_doc({"danger"}), {}, {{"danger", {"dangerous"}}});
  ASSERT_EQ(out.tokens.size(), 2u);
  EXPECT_EQ(out.tokens[0].norm, "danger");
  EXPECT_EQ(out.tokens[1].norm, "dangerous");
}

TEST(Filter, KeepsHashtagsMentionsEmoticonsNumbers) {
  Document d{"x", tokenize("#a @b :) 42 <i> 9876543210 ! w")};
  std::vector<TokenKind> got;
  for (const auto& t : filter(d, {}).tokens) got.push_back(t.kind);
  EXPECT_EQ(got, (std::vector<TokenKind>{TokenKind::Hashtag, TokenKind::Mention, TokenKind::Emoticon,
                                         TokenKind::Number, TokenKind::Word}));
}

TEST(StopList, DefaultKeepsNegation) {
  const auto stops = default_stop_list();
  EXPECT_TRUE(stops.contains("the"));
  EXPECT_FALSE(stops.contains("not"));
  EXPECT_FALSE(stops.contains("good"));
}

TEST(StopList, FilesLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "bisent_pre_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "stops.txt") << "# comment\nThe\n  of \n\n";
  std::ofstream(dir / "exp.tsv") << "danger\tdangerous\nDanger\trisky\n";
  EXPECT_EQ(load_stop_list(dir / "stops.txt"), (StopList{"the", "of"}));
  const auto map = load_expansion_map(dir / "exp.tsv");
  EXPECT_EQ(map.at("danger"), (std::vector<std::string>{"dangerous", "risky"}));
  std::ofstream(dir / "bad.tsv") << "danger\n";
  EXPECT_ANY_THROW(load_expansion_map(dir / "bad.tsv"));
  EXPECT_ANY_THROW(load_stop_list(dir / "missing.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Preprocess, LikesJallikattu) {
  RawPost p;
  p.id = "1";
  p.text = "Likes JALLIKATTUUU";
  const auto doc = preprocess(p, {});
  ASSERT_EQ(doc.tokens.size(), 2u);
  EXPECT_EQ(doc.tokens[0].norm, "lik");
  EXPECT_EQ(doc.tokens[1].norm, "jallikattuu");
  EXPECT_TRUE(doc.tokens[1].emphasis);
  EXPECT_EQ(doc.post_id, "1");
}

TEST(Preprocess, EmptyText) {
  RawPost p;
  p.id = "e";
  EXPECT_TRUE(preprocess(p, {}).tokens.empty());
}

TEST(Preprocess, EqualsManualComposition) {
  auto cfg = default_synth_config();
  cfg.num_posts = 200;
  cfg.emphasis_rate = 0.4;
  const auto c = synth_corpus(cfg, 31);
  const PreprocessOptions opts;
  for (const auto& post : c.posts) {
    Document manual{post.id, {}};
    for (auto t : tokenize(post.text)) {
      t = normalize(t);
      if (t.kind == TokenKind::Word) t.norm = stem(t.norm);
      manual.tokens.push_back(t);
    }
    EXPECT_EQ(preprocess(post, opts), filter(manual, opts.stops));
  }
}

TEST(Preprocess, NoStopWordsNoTripleRuns) {
  Rng rng(8);
  const PreprocessOptions opts;
  for (int i = 0; i < 3000; ++i) {
    RawPost p;
    p.id = "x";
    p.text = random_text(rng) + " The LOOOOVE sooo yesss";
    for (const auto& t : preprocess(p, opts).tokens) {
      EXPECT_FALSE(opts.stops.contains(t.norm)) << t.norm;
      if (t.kind == TokenKind::Word || t.kind == TokenKind::Hashtag || t.kind == TokenKind::Mention) {
        EXPECT_FALSE(has_triple_run(t.norm)) << t.norm;
      }
    }
  }
}
