#pragma once

// Labeled IOB data and raw tweet corpora.
//
// IOB file: one `token<TAB>tag[<TAB>pos]` line per token, sentences separated
// by blank lines. Tweet corpus: UTF-8, one tweet per line.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tweetner/error.hpp"
#include "tweetner/rng.hpp"
#include "tweetner/utf8.hpp"

namespace tweetner {

struct Token {
  std::string text;
  std::optional<std::string> pos;

  friend bool operator==(const Token&, const Token&) = default;
};

struct LabeledSentence {
  std::vector<Token> tokens;
  std::vector<std::string> labels;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
  }

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;
};

struct RawCorpusStats {
  std::uint64_t total = 0;
  std::uint64_t dropped_url = 0;
  std::uint64_t masked_mentions = 0;
  std::uint64_t tokens_seen = 0;
};

/// "O", "B-<type>" or "I-<type>" with a non-empty type.
inline bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  if (tag.size() < 3 || tag[1] != '-') return false;
  return tag[0] == 'B' || tag[0] == 'I';
}

inline bool has_field_separator(std::string_view s) {
  return s.find_first_of("\t\n\r") != std::string_view::npos;
}

inline void validate(const LabeledSentence& s) {
  if (s.tokens.empty()) throw Error(ErrorKind::LengthMismatch, "sentence has no tokens");
  if (s.tokens.size() != s.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "tokens and labels differ in length");
  }
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& t = s.tokens[i];
    if (t.text.empty()) throw Error(ErrorKind::EmptyToken, "token " + std::to_string(i));
    if (has_field_separator(t.text) || (t.pos && (t.pos->empty() || has_field_separator(*t.pos)))) {
      throw Error(ErrorKind::MalformedLine, "token " + std::to_string(i) + " contains a separator");
    }
    if (!is_valid_tag(s.labels[i])) throw Error(ErrorKind::InvalidTag, "'" + s.labels[i] + "'");
  }
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

inline bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace detail

inline std::vector<LabeledSentence> read_iob(std::istream& in) {
  std::vector<LabeledSentence> out;
  LabeledSentence current;
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return "line " + std::to_string(lineno); };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) {
      if (!current.tokens.empty()) out.push_back(std::move(current));
      current = {};
      continue;
    }
    if (!utf8::is_valid(line)) throw Error(ErrorKind::InvalidUtf8, where());
    const auto cols = detail::split_tabs(line);
    if (cols.size() != 2 && cols.size() != 3) {
      throw Error(ErrorKind::MalformedLine, where() + ": expected 2 or 3 tab-separated columns");
    }
    if (cols[0].empty()) throw Error(ErrorKind::EmptyToken, where());
    if (!is_valid_tag(cols[1])) throw Error(ErrorKind::InvalidTag, where() + ": '" + std::string(cols[1]) + "'");
    Token token{std::string(cols[0]), std::nullopt};
    if (cols.size() == 3) {
      if (cols[2].empty()) throw Error(ErrorKind::MalformedLine, where() + ": empty POS column");
      token.pos = std::string(cols[2]);
    }
    current.tokens.push_back(std::move(token));
    current.labels.emplace_back(cols[1]);
  }
  if (!current.tokens.empty()) out.push_back(std::move(current));
  return out;
}

inline void write_iob(const std::vector<LabeledSentence>& sentences, std::ostream& out) {
  bool first = true;
  for (const auto& s : sentences) {
    validate(s);
    if (!first) out << '\n';
    first = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i].text << '\t' << s.labels[i];
      if (s.tokens[i].pos) out << '\t' << *s.tokens[i].pos;
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing IOB stream");
}

/// Splits on runs of Unicode whitespace.
inline std::vector<Token> tokenize_tweet(std::string_view line) {
  std::vector<Token> out;
  std::u32string current;
  for (char32_t cp : utf8::decode(line)) {
    if (utf8::is_whitespace(cp)) {
      if (!current.empty()) out.push_back({utf8::encode(current), std::nullopt});
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) out.push_back({utf8::encode(current), std::nullopt});
  return out;
}

inline bool is_url(std::string_view token) {
  return token.starts_with("http://") || token.starts_with("https://");
}

inline bool is_mention(std::string_view token) { return token.size() > 1 && token.front() == '@'; }

inline constexpr std::string_view kMaskedMention = "@*";

namespace detail {

// Byte ranges of whitespace-delimited tokens, so that masking can rewrite a
// line in place and untouched lines stay byte-identical.
struct Span {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<Span> token_spans(std::string_view line) {
  std::vector<Span> spans;
  std::size_t i = 0;
  constexpr std::size_t none = std::string_view::npos;
  std::size_t start = none;
  while (i < line.size()) {
    const std::size_t at = i;
    const auto lead = static_cast<unsigned char>(line[i]);
    const std::size_t len = lead < 0x80 ? 1 : (lead & 0xE0) == 0xC0 ? 2 : (lead & 0xF0) == 0xE0 ? 3 : 4;
    const std::u32string cp = utf8::decode(line.substr(i, len));
    i += len;
    if (utf8::is_whitespace(cp.front())) {
      if (start != none) spans.push_back({start, at});
      start = none;
    } else if (start == none) {
      start = at;
    }
  }
  if (start != none) spans.push_back({start, line.size()});
  return spans;
}

}  // namespace detail

/// Drops URL-bearing tweets (keeping each with probability url_keep_rate)
/// and masks each mention token independently with probability
/// mention_mask_rate. Draw order per line: one uniform when the line has a
/// URL, then, if the line is kept, one uniform per mention token.
inline RawCorpusStats preprocess_corpus(std::istream& in, std::ostream& out, double url_keep_rate,
                                        double mention_mask_rate, std::uint64_t seed) {
  if (!(url_keep_rate >= 0.0 && url_keep_rate <= 1.0) || !(mention_mask_rate >= 0.0 && mention_mask_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "rates must lie in [0, 1]");
  }
  Rng rng(seed);
  RawCorpusStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    ++stats.total;
    if (!utf8::is_valid(line)) throw Error(ErrorKind::InvalidUtf8, "line " + std::to_string(lineno));
    const auto spans = detail::token_spans(line);
    stats.tokens_seen += spans.size();
    const std::string_view view(line);
    bool has_url = false;
    for (const auto& s : spans) has_url = has_url || is_url(view.substr(s.begin, s.end - s.begin));
    if (has_url && !rng.bernoulli(url_keep_rate)) {
      ++stats.dropped_url;
      continue;
    }
    std::string rewritten;
    std::size_t copied = 0;
    for (const auto& s : spans) {
      if (!is_mention(view.substr(s.begin, s.end - s.begin))) continue;
      if (!rng.bernoulli(mention_mask_rate)) continue;
      ++stats.masked_mentions;
      rewritten.append(view.substr(copied, s.begin - copied));
      rewritten.append(kMaskedMention);
      copied = s.end;
    }
    rewritten.append(view.substr(copied));
    out << rewritten << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing corpus");
  return stats;
}

/// Reads a tweet corpus into token sequences, skipping empty lines.
inline std::vector<std::vector<std::string>> read_tokenized_corpus(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = tokenize_tweet(line);
    if (tokens.empty()) continue;
    std::vector<std::string> words;
    words.reserve(tokens.size());
    for (auto& t : tokens) words.push_back(std::move(t.text));
    out.push_back(std::move(words));
  }
  return out;
}

}  // namespace tweetner
