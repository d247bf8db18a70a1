#include "bisent/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {
namespace {

constexpr std::array<std::string_view, 29> kEmoticons = {
    ":'-(", ":-)", ":-(", ":-D", ":-P", ":-p", ";-)", ":-/", ":'(", "</3", "^_^", "-_-", "T_T",
    ":)",   ":(",  ":D",  ";)",  ":P",  ":p",  ":/",  ":|",  ":o",  ":O",  "<3",  "XD",  "xD",
    "=)",   "=(",  ":*",
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
bool is_tag_char(char c) { return is_alnum(c) || c == '_'; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool starts_with_nocase(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(text[i]) != prefix[i]) return false;
  }
  return true;
}

// Each matcher returns the token length at the start of `rest`, or 0.

std::size_t match_url(std::string_view rest) {
  if (!starts_with_nocase(rest, "http://") && !starts_with_nocase(rest, "https://") &&
      !starts_with_nocase(rest, "www.")) {
    return 0;
  }
  std::size_t n = 0;
  while (n < rest.size() && !is_space(rest[n])) ++n;
  return n;
}

std::size_t match_html(std::string_view rest) {
  if (rest.size() >= 3 && rest[0] == '<') {
    std::size_t n = 1;
    if (rest[n] == '/') ++n;
    if (n < rest.size() && is_alpha(rest[n])) {
      constexpr std::size_t kMaxTag = 256;
      for (; n < rest.size() && n < kMaxTag; ++n) {
        if (rest[n] == '>') return n + 1;
        if (rest[n] == '<' || rest[n] == '\n') return 0;
      }
    }
    return 0;
  }
  if (rest.size() >= 3 && rest[0] == '&') {
    std::size_t n = 1;
    if (rest[n] == '#') {
      ++n;
      while (n < rest.size() && n <= 8 && is_digit(rest[n])) ++n;
      if (n > 2 && n < rest.size() && rest[n] == ';') return n + 1;
      return 0;
    }
    while (n < rest.size() && n <= 10 && is_alpha(rest[n])) ++n;
    if (n > 2 && n < rest.size() && rest[n] == ';') return n + 1;
  }
  return 0;
}

std::size_t match_sigil(std::string_view rest, char sigil) {
  if (rest.empty() || rest[0] != sigil) return 0;
  std::size_t n = 1;
  while (n < rest.size() && is_tag_char(rest[n])) ++n;
  return n > 1 ? n : 0;
}

std::size_t match_emoticon(std::string_view rest) {
  for (auto e : kEmoticons) {
    if (rest.substr(0, e.size()) != e) continue;
    if (e.size() < rest.size() && is_alnum(rest[e.size()])) continue;
    return e.size();
  }
  return 0;
}

// Ten or more digits with - ( ) separators, or seven or more when written
// with a leading + or (, or the local xxx-xxxx form.
std::size_t match_phone(std::string_view rest) {
  if (rest.empty() || !(rest[0] == '+' || rest[0] == '(' || is_digit(rest[0]))) return 0;
  std::size_t n = rest[0] == '+' ? 1 : 0;
  while (n < rest.size() && (is_digit(rest[n]) || rest[n] == '-' || rest[n] == '(' || rest[n] == ')')) ++n;
  while (n > 0 && !is_digit(rest[n - 1])) --n;
  if (n == 0) return 0;
  if (n < rest.size() && is_alnum(rest[n])) return 0;
  const auto body = rest.substr(0, n);
  const auto digits = static_cast<std::size_t>(std::count_if(body.begin(), body.end(), is_digit));
  if (digits > 15) return 0;
  const bool local = n == 8 && body[3] == '-' && digits == 7;
  const bool marked = (body[0] == '+' || body[0] == '(') && digits >= 7;
  return (digits >= 10 || marked || local) ? n : 0;
}

std::size_t match_number(std::string_view rest) {
  std::size_t n = 0;
  while (n < rest.size() && is_digit(rest[n])) ++n;
  if (n == 0) return 0;
  while (n + 1 < rest.size() && (rest[n] == '.' || rest[n] == ',') && is_digit(rest[n + 1])) {
    ++n;
    while (n < rest.size() && is_digit(rest[n])) ++n;
  }
  return n;
}

std::size_t match_word(std::string_view rest) {
  std::size_t n = 0;
  while (n < rest.size()) {
    if (is_alpha(rest[n])) {
      ++n;
    } else if (rest[n] == '\'' && n > 0 && n + 1 < rest.size() && is_alpha(rest[n + 1])) {
      ++n;
    } else {
      break;
    }
  }
  return n;
}

// One UTF-8 code point, or a single byte if the sequence is invalid.
std::size_t match_symbol(std::string_view rest) {
  const auto lead = static_cast<unsigned char>(rest[0]);
  std::size_t len = 1;
  if (lead >= 0xC2 && lead <= 0xDF) len = 2;
  else if (lead >= 0xE0 && lead <= 0xEF) len = 3;
  else if (lead >= 0xF0 && lead <= 0xF4) len = 4;
  if (len > rest.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(rest[k]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

bool collapse_runs(std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool collapsed = false;
  for (char c : s) {
    const auto n = out.size();
    if (is_alpha(c) && n >= 2 && out[n - 1] == c && out[n - 2] == c) {
      collapsed = true;
      continue;
    }
    out.push_back(c);
  }
  s = std::move(out);
  return collapsed;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Hashtag: return "hashtag";
    case TokenKind::Mention: return "mention";
    case TokenKind::Url: return "url";
    case TokenKind::HtmlTag: return "html_tag";
    case TokenKind::Emoticon: return "emoticon";
    case TokenKind::Number: return "number";
    case TokenKind::Phone: return "phone";
    case TokenKind::Symbol: return "symbol";
  }
  return "symbol";
}

std::span<const std::string_view> emoticons() { return kEmoticons; }

std::string fold_word(std::string_view surface) {
  std::string s(surface);
  for (auto& c : s) c = lower(c);
  collapse_runs(s);
  return s;
}

Token normalize(Token token) {
  std::string_view body = token.surface;
  switch (token.kind) {
    case TokenKind::Hashtag:
    case TokenKind::Mention:
      body.remove_prefix(1);
      [[fallthrough]];
    case TokenKind::Word: {
      std::string s(body);
      for (auto& c : s) c = lower(c);
      const bool elongated = collapse_runs(s);
      std::size_t letters = 0;
      bool all_upper = true;
      for (char c : body) {
        if (!is_alpha(c)) continue;
        ++letters;
        if (!std::isupper(static_cast<unsigned char>(c))) all_upper = false;
      }
      token.norm = std::move(s);
      token.emphasis = elongated || (letters >= 2 && all_upper);
      break;
    }
    default:
      token.norm = token.surface;
      token.emphasis = false;
      break;
  }
  return token;
}

std::vector<Token> tokenize(std::string_view text) {
  using Matcher = std::size_t (*)(std::string_view);
  struct Rule {
    TokenKind kind;
    Matcher match;
  };
  static constexpr std::array<Rule, 9> kRules = {{
      {TokenKind::Url, match_url},
      {TokenKind::HtmlTag, match_html},
      {TokenKind::Hashtag, [](std::string_view r) { return match_sigil(r, '#'); }},
      {TokenKind::Mention, [](std::string_view r) { return match_sigil(r, '@'); }},
      {TokenKind::Emoticon, match_emoticon},
      {TokenKind::Phone, match_phone},
      {TokenKind::Number, match_number},
      {TokenKind::Word, match_word},
      {TokenKind::Symbol, match_symbol},
  }};

  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (is_space(text[pos])) {
      ++pos;
      continue;
    }
    const auto rest = text.substr(pos);
    for (const auto& rule : kRules) {
      const auto len = rule.match(rest);
      if (len == 0) continue;
      Token t;
      t.surface = std::string(rest.substr(0, len));
      t.kind = rule.kind;
      tokens.push_back(normalize(std::move(t)));
      pos += len;
      break;
    }
  }
  return tokens;
}

namespace {

std::string strip_suffix(std::string_view word) {
  std::string w(word);
  const auto stem_len = [&](std::size_t suffix) { return w.size() - suffix; };
  if (ends_with(w, "ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "es") && stem_len(2) >= 3) return w.substr(0, stem_len(2));
  if (ends_with(w, "s") && stem_len(1) >= 3 && !ends_with(w, "ss") && !ends_with(w, "us")) {
    return w.substr(0, stem_len(1));
  }
  if (ends_with(w, "ing") && stem_len(3) >= 3) return w.substr(0, stem_len(3));
  if (ends_with(w, "ed") && stem_len(2) >= 3) return w.substr(0, stem_len(2));
  return w;
}

}  // namespace

std::string stem(std::string_view word) {
  auto out = strip_suffix(word);
  collapse_runs(out);
  return out;
}


StopList default_stop_list() {
  return {"a",     "an",    "the",   "and",  "or",    "but",   "is",    "are",  "was",   "were",
          "be",    "been",  "being", "am",   "to",    "of",    "in",    "on",   "at",    "for",
          "with",  "by",    "from",  "this", "that",  "these", "those", "it",   "its",   "i",
          "me",    "my",    "we",    "our",  "you",   "your",  "he",    "him",  "his",   "she",
          "her",   "they",  "them",  "their", "as",   "so",    "if",    "then", "than",  "too",
          "very",  "just",  "there", "here", "what",  "which", "who",   "whom", "will",  "would",
          "can",   "could", "shall", "should", "do",  "does",  "did",   "has",  "have",  "had",
          "about", "into",  "over",  "again", "all",  "any",   "each",  "some", "such",  "only",
          "own",   "same",  "also",  "up",   "down",  "out",   "off",   "rt",   "amp",   "via"};
}

StopList load_stop_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop list " + path.string());
  StopList stops;
  std::string line;
  while (std::getline(in, line)) {
    const auto word = trim(line);
    if (word.empty() || word.front() == '#') continue;
    stops.insert(fold_word(word));
  }
  return stops;
}

ExpansionMap load_expansion_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open expansion map " + path.string());
  ExpansionMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw DataError("expansion map line " + std::to_string(line_no) + ": expected source<TAB>addition");
    }
    map[fold_word(trim(fields[0]))].push_back(fold_word(trim(fields[1])));
  }
  return map;
}

Document filter(const Document& doc, const StopList& stops, const ExpansionMap& expansions) {
  Document out{doc.post_id, {}};
  out.tokens.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    switch (t.kind) {
      case TokenKind::Url:
      case TokenKind::HtmlTag:
      case TokenKind::Phone:
      case TokenKind::Symbol:
        continue;
      default:
        break;
    }
    if (stops.contains(t.norm)) continue;
    if (t.kind == TokenKind::Word && stops.contains(fold_word(t.surface))) continue;
    out.tokens.push_back(t);
    if (t.kind != TokenKind::Word) continue;
    if (const auto it = expansions.find(t.norm); it != expansions.end()) {
      for (const auto& addition : it->second) {
        if (stops.contains(addition)) continue;
        out.tokens.push_back(Token{addition, addition, TokenKind::Word, false});
      }
    }
  }
  return out;
}

Document preprocess(const RawPost& post, const PreprocessOptions& options) {
  Document doc{post.id, tokenize(post.text)};
  for (auto& t : doc.tokens) {
    t = normalize(std::move(t));
    if (t.kind == TokenKind::Word) t.norm = stem(t.norm);
  }
  return filter(doc, options.stops, options.expansions);
}

std::vector<Document> preprocess_corpus(const Corpus& corpus, const PreprocessOptions& options) {
  std::vector<Document> docs;
  docs.reserve(corpus.posts.size());
  for (const auto& post : corpus.posts) docs.push_back(preprocess(post, options));
  return docs;
}

}  // namespace bisent
