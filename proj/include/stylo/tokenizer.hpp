#pragma once

// Deterministic word/number/punctuation tokenizer for abstract text.
//
// Rules, in the order the scanner applies them:
//   * input is NFC-normalized; curly quotes become straight quotes and
//     Unicode space separators become plain whitespace
//   * a word run is a maximal sequence of letters, digits and combining
//     marks; '-', '&' and '\'' join two alphanumerics ("scrip-dividend",
//     "S&P"), '.' joins digit.digit ("5.5") and single-letter abbreviation
//     segments ("i.e.", "U.S."), ',' joins digit groups of three ("1,200")
//   * English clitics are split off ("it's" -> "it" "'s", "don't" -> "do" "n't")
//   * every other code point is its own PUNCT token ("$100" -> "$" "100")
//   * a token is NUMBER iff it matches the cardinal grammar
//     digits (',' digit{3})* ('.' digits)?

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "stylo/io.hpp"

namespace stylo {

enum class TokenKind : std::uint8_t { Word, Number, Punct };

struct Token {
  std::string surface;
  std::size_t index = 0;
  TokenKind kind = TokenKind::Word;

  friend bool operator==(const Token&, const Token&) = default;
};

inline std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Word: return "WORD";
    case TokenKind::Number: return "NUMBER";
    case TokenKind::Punct: return "PUNCT";
  }
  return "?";
}

namespace detail {

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline bool is_all_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

// NFC plus quote and space folding. ASCII input is returned unchanged.
inline std::string normalize_text(std::string_view text) {
  if (is_all_ascii(text)) return std::string(text);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString dst;
  if (U_SUCCESS(status)) {
    dst = nfc->normalize(src, status);
  }
  if (U_FAILURE(status)) dst = src;

  std::string out;
  out.reserve(text.size());
  for (int32_t i = 0; i < dst.length();) {
    UChar32 c = dst.char32At(i);
    i += U16_LENGTH(c);
    switch (c) {
      case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
        out.push_back('\'');
        continue;
      case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
        out.push_back('"');
        continue;
      default:
        break;
    }
    if (c != '\t' && c != '\n' && c != '\r' && u_isUWhiteSpace(c)) {
      out.push_back(' ');
      continue;
    }
    char buf[4];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, c, err);
    if (!err) out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

inline std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> cps;
  cps.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  for (int32_t i = 0; i < n;) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) c = 0xFFFD;
    cps.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return cps;
}

inline bool is_space(UChar32 c) {
  if (c < 0x80) return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  return u_isUWhiteSpace(c);
}

inline bool is_word_char(UChar32 c) {
  if (c < 0x80) return is_ascii_alpha(static_cast<char>(c)) || is_ascii_digit(static_cast<char>(c));
  const int8_t t = u_charType(c);
  return u_isalnum(c) || t == U_NON_SPACING_MARK || t == U_COMBINING_SPACING_MARK ||
         t == U_ENCLOSING_MARK;
}

inline bool is_digit_cp(UChar32 c) { return c >= '0' && c <= '9'; }

inline bool is_cardinal_literal(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_ascii_digit(s[i])) ++i;
  const std::size_t lead = i;
  if (lead == 0) return false;
  if (i < s.size() && s[i] == ',') {
    if (lead > 3) return false;
    while (i < s.size() && s[i] == ',') {
      if (i + 3 >= s.size()) return false;
      for (std::size_t k = 1; k <= 3; ++k)
        if (!is_ascii_digit(s[i + k])) return false;
      i += 4;
      if (i < s.size() && is_ascii_digit(s[i])) return false;
    }
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (i >= s.size()) return false;
    while (i < s.size() && is_ascii_digit(s[i])) ++i;
  }
  return i == s.size();
}

// "i.e", "U.S", "e.g" -- alternating single letters and periods so far.
inline bool is_letter_abbreviation_stem(std::string_view s) {
  if (s.size() < 3) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i % 2 == 0) {
      if (!is_ascii_alpha(s[i])) return false;
    } else if (s[i] != '.') {
      return false;
    }
  }
  return s.size() % 2 == 1;
}

inline bool is_known_abbreviation(std::string_view s) {
  static constexpr std::string_view kAbbrev[] = {
      "al", "approx", "ca", "cf", "co", "corp", "dr", "eq", "eqs", "etc", "fig", "figs",
      "inc", "jr", "ltd", "mr", "mrs", "ms", "pp", "prof", "resp", "sr", "st", "vol", "vs"};
  const std::string lower = ascii_lower(s);
  for (auto a : kAbbrev)
    if (lower == a) return true;
  return false;
}

inline bool is_clitic_tail(std::string_view lower_tail) {
  return lower_tail == "s" || lower_tail == "re" || lower_tail == "ve" || lower_tail == "ll" ||
         lower_tail == "d" || lower_tail == "m";
}

// Splits a word run into stem + clitic when it carries one.
inline void push_word_run(std::string_view run, std::vector<Token>& out) {
  auto emit = [&out](std::string_view s) {
    Token t;
    t.surface = std::string(s);
    t.index = out.size();
    t.kind = is_cardinal_literal(s) ? TokenKind::Number : TokenKind::Word;
    out.push_back(std::move(t));
  };
  const std::string lower = ascii_lower(run);
  const auto alpha_stem = [](std::string_view stem) {
    for (char c : stem)
      if (!is_ascii_alpha(c)) return false;
    return true;
  };
  if (lower.size() > 3 && lower.ends_with("n't") && alpha_stem(run.substr(0, run.size() - 3))) {
    push_word_run(run.substr(0, run.size() - 3), out);
    emit(run.substr(run.size() - 3));
    return;
  }
  const auto apos = run.rfind('\'');
  if (apos != std::string_view::npos && apos > 0 &&
      is_clitic_tail(std::string_view(lower).substr(apos + 1))) {
    push_word_run(run.substr(0, apos), out);
    emit(run.substr(apos));
    return;
  }
  emit(run);
}

}  // namespace detail

// Splits text into tokens. Pure and deterministic; empty input yields no tokens.
inline std::vector<Token> tokenize(std::string_view text) {
  using namespace detail;
  const std::string norm = normalize_text(text);
  const std::string_view s = norm;
  const std::vector<CodePoint> cps = decode(s);
  const std::size_t n = cps.size();

  std::vector<Token> out;
  out.reserve(n / 5 + 1);

  auto word_at = [&](std::size_t k) { return k < n && is_word_char(cps[k].value); };
  auto letter_at = [&](std::size_t k) {
    return k < n && cps[k].value < 0x80 && is_ascii_alpha(static_cast<char>(cps[k].value));
  };

  std::size_t i = 0;
  while (i < n) {
    const UChar32 c = cps[i].value;
    if (is_space(c)) {
      ++i;
      continue;
    }

    // Stand-alone clitic, as produced by re-tokenizing joined output ("it 's").
    if (c == '\'' && (i == 0 || !is_word_char(cps[i - 1].value))) {
      std::size_t j = i + 1;
      while (letter_at(j) && j - i <= 2) ++j;
      if (j > i + 1 && !word_at(j)) {
        const std::string tail = ascii_lower(s.substr(cps[i + 1].begin, cps[j - 1].end - cps[i + 1].begin));
        if (is_clitic_tail(tail)) {
          detail::push_word_run(s.substr(cps[i].begin, cps[j - 1].end - cps[i].begin), out);
          i = j;
          continue;
        }
      }
    }

    if (!is_word_char(c)) {
      Token t;
      t.surface = std::string(s.substr(cps[i].begin, cps[i].end - cps[i].begin));
      t.index = out.size();
      t.kind = TokenKind::Punct;
      out.push_back(std::move(t));
      ++i;
      continue;
    }

    // Word run.
    const std::size_t start = i;
    std::size_t segment_start = i;  // start of the current '.'-delimited segment
    ++i;
    while (i < n) {
      const UChar32 d = cps[i].value;
      if (is_word_char(d)) {
        ++i;
        continue;
      }
      if ((d == '-' || d == '&' || d == '\'') && word_at(i + 1)) {
        i += 1;
        segment_start = i;
        continue;
      }
      if (d == '.' && word_at(i + 1)) {
        const bool decimal = is_digit_cp(cps[i - 1].value) && is_digit_cp(cps[i + 1].value);
        const bool abbrev = i - segment_start == 1 && letter_at(i - 1) && letter_at(i + 1) &&
                            !word_at(i + 2);
        if (decimal || abbrev) {
          i += 1;
          segment_start = i;
          continue;
        }
      }
      if (d == ',' && is_digit_cp(cps[i - 1].value) && i + 3 < n) {
        bool group = true;
        for (std::size_t k = 1; k <= 3 && group; ++k)
          group = i + k < n && is_digit_cp(cps[i + k].value);
        group = group && !(i + 4 < n && is_digit_cp(cps[i + 4].value));
        if (group) {
          // only inside a pure digit-group literal such as 1,200 or 12,345,678
          bool digits_only = true;
          for (std::size_t k = start; k < i; ++k)
            if (!is_digit_cp(cps[k].value) && cps[k].value != ',') digits_only = false;
          if (digits_only) {
            i += 1;
            continue;
          }
        }
      }
      break;
    }
    std::size_t end_byte = cps[i - 1].end;
    // Trailing period of an abbreviation stays attached.
    if (i < n && cps[i].value == '.') {
      const std::string_view stem = s.substr(cps[start].begin, end_byte - cps[start].begin);
      if (is_letter_abbreviation_stem(stem) || is_known_abbreviation(stem)) {
        end_byte = cps[i].end;
        ++i;
      }
    }
    detail::push_word_run(s.substr(cps[start].begin, end_byte - cps[start].begin), out);
  }
  return out;
}

// Tokens counted as words for the minimum-length corpus filter.
inline std::size_t word_count(std::span<const Token> tokens) {
  std::size_t count = 0;
  for (const auto& t : tokens)
    if (t.kind != TokenKind::Punct) ++count;
  return count;
}

inline std::string join_surfaces(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

}  // namespace stylo
