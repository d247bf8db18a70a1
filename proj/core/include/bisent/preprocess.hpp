#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bisent/corpus.hpp"

namespace bisent {

enum class TokenKind : std::uint8_t {
  Word,
  Hashtag,
  Mention,
  Url,
  HtmlTag,
  Emoticon,
  Number,
  Phone,
  Symbol,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  std::string surface;
  std::string norm;
  TokenKind kind = TokenKind::Symbol;
  bool emphasis = false;  // surface was all capitals or elongated

  bool operator==(const Token&) const = default;
};

struct Document {
  std::string post_id;
  std::vector<Token> tokens;

  bool operator==(const Document&) const = default;
};

// Recognised emoticons, longest first.
std::span<const std::string_view> emoticons();

// Splits text into tokens. Every non-whitespace byte lands in exactly one
// token; at each position the first matching kind in the order
//   url > html_tag > hashtag > mention > emoticon > phone > number > word > symbol
// wins. A symbol is one UTF-8 code point (or one stray byte when the input
// is not valid UTF-8). Returned tokens are already normalized.
std::vector<Token> tokenize(std::string_view text);

// Lowercases word, hashtag and mention norms and collapses any run of three
// or more identical letters to two. Sets emphasis when the surface has at
// least two letters, all upper case, or when a run was collapsed. Other
// kinds keep norm == surface (hashtag/mention norms drop the sigil).
Token normalize(Token token);

// Collapsed lowercase form of a word surface (the norm normalize() gives).
std::string fold_word(std::string_view surface);

// Minimal suffix stripper. The first matching rule applies:
//   ies -> y | sses -> ss | es -> "" (stem >= 3) |
//   s -> "" (stem >= 3, word not ending ss/us) | ing -> "" (stem >= 3) |
//   ed -> "" (stem >= 3) | unchanged
// A suffix whose length condition fails does not block later rules. Letter
// runs the strip may create ("yyies" -> "yyy") are collapsed to two.
std::string stem(std::string_view word);

using StopList = std::set<std::string>;

// source word -> words appended after it.
using ExpansionMap = std::map<std::string, std::vector<std::string>>;

StopList default_stop_list();

// One lowercase word per line; blank lines and '#' comments ignored.
StopList load_stop_list(const std::filesystem::path& path);

// "source<TAB>addition" per line. Repeated sources accumulate additions.
ExpansionMap load_expansion_map(const std::filesystem::path& path);

// Drops urls, html tags, phone numbers, symbols and stop words (matched on
// the stemmed norm or the unstemmed folded surface). Each kept word whose
// norm is an expansion source is followed by its additions, unless an
// addition is itself a stop word.
Document filter(const Document& doc, const StopList& stops, const ExpansionMap& expansions = {});

struct PreprocessOptions {
  StopList stops = default_stop_list();
  ExpansionMap expansions;
};

// filter(stem each word(normalize each(tokenize(post.text)))).
Document preprocess(const RawPost& post, const PreprocessOptions& options);
std::vector<Document> preprocess_corpus(const Corpus& corpus, const PreprocessOptions& options);

}  // namespace bisent
