#pragma once

// Rule-based feature tagger. Each token receives exactly one of the six
// style feature classes or OTHER, using the closed-class lexicon,
// suffix morphology and a one-token context window for ambiguous words.
//
// Penn Treebank correspondence:
//   PRONOUN     PRP PRP$ WP WP$
//   DETERMINER  DT PDT WDT
//   PAST_VERB   VBD VBN (adjectival participles included)
//   CARDINAL    CD (ordinals excluded)
//   AND_COORD   the string "and"
//   QUESTION    the string "?"

#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/lexicon.hpp"
#include "stylo/tokenizer.hpp"

namespace stylo {

enum class FeatureTag : std::uint8_t {
  Pronoun,
  AndCoord,
  Question,
  Determiner,
  PastVerb,
  Cardinal,
  Other,
};

inline constexpr std::size_t kFeatureTagCount = 7;

inline std::string_view to_string(FeatureTag t) {
  switch (t) {
    case FeatureTag::Pronoun: return "PRONOUN";
    case FeatureTag::AndCoord: return "AND_COORD";
    case FeatureTag::Question: return "QUESTION";
    case FeatureTag::Determiner: return "DETERMINER";
    case FeatureTag::PastVerb: return "PAST_VERB";
    case FeatureTag::Cardinal: return "CARDINAL";
    case FeatureTag::Other: return "OTHER";
  }
  return "?";
}

struct TaggedToken {
  Token token;
  FeatureTag tag = FeatureTag::Other;
};

namespace detail {

inline bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

inline std::string_view last_hyphen_component(std::string_view w) {
  const auto pos = w.rfind('-');
  return pos == std::string_view::npos ? w : w.substr(pos + 1);
}

class TagContext {
 public:
  TagContext(std::span<const Token> tokens, const Lexicon& lex,
             const std::vector<std::string>* lowered = nullptr)
      : tokens_(tokens), lex_(lex), lowered_(lowered) {}

  FeatureTag classify(std::size_t k) const {
    const Token& t = tokens_[k];
    if (t.kind == TokenKind::Punct) return t.surface == "?" ? FeatureTag::Question : FeatureTag::Other;
    if (t.kind == TokenKind::Number) return FeatureTag::Cardinal;

    const std::string w = lower(k);
    if (w == "and") return FeatureTag::AndCoord;
    if (const AmbiguityRule* rule = lex_.ambiguity(w)) return apply(*rule, k, w);
    if (lex_.is_pronoun(w)) return FeatureTag::Pronoun;
    if (lex_.is_determiner(w)) return FeatureTag::Determiner;
    if (lex_.is_number_word(w) || is_hyphenated_number(w)) return FeatureTag::Cardinal;
    if (lex_.irregular_past.contains(w)) return FeatureTag::PastVerb;
    if (lex_.past_after_auxiliary.contains(w))
      return follows_auxiliary(k) ? FeatureTag::PastVerb : FeatureTag::Other;
    if (is_morphological_past(k, w)) return FeatureTag::PastVerb;
    return FeatureTag::Other;
  }

 private:
  std::string lower(std::size_t k) const {
    if (lowered_) return (*lowered_)[k];
    return ascii_lower(tokens_[k].surface);
  }

  bool is_word(std::size_t k) const { return k < tokens_.size() && tokens_[k].kind == TokenKind::Word; }

  bool surface_is(std::size_t k, std::string_view s) const {
    return k < tokens_.size() && tokens_[k].surface == s;
  }

  bool is_hyphenated_number(const std::string& w) const {
    if (w.find('-') == std::string::npos) return false;
    std::size_t start = 0;
    while (start <= w.size()) {
      auto end = w.find('-', start);
      if (end == std::string::npos) end = w.size();
      if (!lex_.is_number_word(w.substr(start, end - start))) return false;
      start = end + 1;
    }
    return true;
  }

  // Sentence start: nothing before, or only opening brackets/quotes after . ? !
  bool sentence_initial(std::size_t k) const {
    while (k > 0) {
      const Token& p = tokens_[k - 1];
      if (p.surface == "(" || p.surface == "\"" || p.surface == "'" || p.surface == "[") {
        --k;
        continue;
      }
      return p.surface == "." || p.surface == "?" || p.surface == "!";
    }
    return true;
  }

  bool capitalized_word(std::size_t k) const {
    return is_word(k) && is_upper_ascii(tokens_[k].surface.front());
  }

  bool ends_in_ed(std::string_view comp) const {
    if (comp.size() < 4 || !comp.ends_with("ed")) return false;
    for (char c : comp)
      if (!is_ascii_alpha(c)) return false;
    return !lex_.ed_exceptions.contains(std::string(comp));
  }

  bool is_morphological_past(std::size_t k, const std::string& w) const {
    const std::string_view comp = last_hyphen_component(w);
    const bool compound = comp.size() != w.size();
    if (compound && lex_.irregular_past.contains(std::string(comp))) return passes_case_guard(k);
    if (!ends_in_ed(comp)) return false;
    return passes_case_guard(k);
  }

  // A capitalized "-ed" word inside a sentence is a proper noun ("United").
  bool passes_case_guard(std::size_t k) const {
    if (!is_upper_ascii(tokens_[k].surface.front())) return true;
    return sentence_initial(k) && !capitalized_word(k + 1);
  }

  bool lowercase_morph_past(std::size_t k) const {
    if (!is_word(k)) return false;
    const std::string w = lower(k);
    if (lex_.irregular_past.contains(w)) return true;
    return ends_in_ed(last_hyphen_component(w)) && !is_upper_ascii(tokens_[k].surface.front());
  }

  bool follows_auxiliary(std::size_t k) const {
    static const Lexicon::WordSet kHaveBe = {"have", "has", "had", "having", "'ve", "'d", "be",
                                             "is", "are", "was", "were", "been", "being", "am",
                                             "'s", "'re", "'m", "get", "gets", "got"};
    std::size_t skipped = 0;
    while (k > 0 && skipped <= 2) {
      --k;
      if (!is_word(k)) return false;
      const std::string p = lower(k);
      if (kHaveBe.contains(p)) return true;
      const bool adverb = (p.size() > 3 && p.ends_with("ly")) || p == "not" || p == "n't" ||
                          p == "also" || p == "already" || p == "never" || p == "since";
      if (!adverb) return false;
      ++skipped;
    }
    return false;
  }

  // Heuristic head-noun test for the word after a potential determiner.
  bool noun_like(std::size_t k) const {
    if (!is_word(k)) return false;
    const std::string w = lower(k);
    if (w == "and" || lex_.is_pronoun(w) || lex_.is_determiner(w) || lex_.ambiguous.contains(w) ||
        lex_.auxiliaries.contains(w) || lex_.prepositions.contains(w) ||
        lex_.function_words.contains(w) || lex_.verbs.contains(w) ||
        lex_.irregular_past.contains(w) || lex_.is_number_word(w))
      return false;
    if (w.size() > 3 && w.ends_with("ly")) return false;
    if (ends_in_ed(last_hyphen_component(w)) && !is_upper_ascii(tokens_[k].surface.front()))
      return false;
    return true;
  }

  FeatureTag apply(AmbiguityRule rule, std::size_t k, const std::string& w) const {
    switch (rule) {
      case AmbiguityRule::AlwaysPronoun:
        return FeatureTag::Pronoun;
      case AmbiguityRule::AlwaysDeterminer:
        return FeatureTag::Determiner;
      case AmbiguityRule::ThatContext:
        return noun_like(k + 1) && demonstrative_slot(k) ? FeatureTag::Determiner : FeatureTag::Other;
      case AmbiguityRule::WhContext:
        if (k > 0 && tokens_[k - 1].surface == ",") return FeatureTag::Pronoun;
        return noun_like(k + 1) ? FeatureTag::Determiner : FeatureTag::Pronoun;
      case AmbiguityRule::Correlative:
        return correlative(k, w);
      case AmbiguityRule::PredeterminerBeforeDet: {
        if (!is_word(k + 1)) return FeatureTag::Other;
        const std::string next = lower(k + 1);
        return lex_.is_determiner(next) || lex_.is_pronoun(next) || next == "her"
                   ? FeatureTag::Determiner
                   : FeatureTag::Other;
      }
      case AmbiguityRule::PredeterminerBeforeArticle: {
        if (!is_word(k + 1)) return FeatureTag::Other;
        const std::string next = lower(k + 1);
        return next == "a" || next == "an" ? FeatureTag::Determiner : FeatureTag::Other;
      }
      case AmbiguityRule::ListMarkerGuard:
        return k > 0 && surface_is(k - 1, "(") && surface_is(k + 1, ")") ? FeatureTag::Other
                                                                           : FeatureTag::Pronoun;
      case AmbiguityRule::AcronymGuard: {
        const std::string& s = tokens_[k].surface;
        const bool all_caps = s.size() > 1 && is_upper_ascii(s[0]) && is_upper_ascii(s[1]);
        return all_caps ? FeatureTag::Other : FeatureTag::Pronoun;
      }
    }
    return FeatureTag::Other;
  }

  // "that" heads a noun phrase only where a complementizer or relativizer
  // cannot stand: at the start of a clause, after a preposition or a
  // coordinator. After nouns, verbs of saying and "so"/"such" it is a
  // complementizer or relativizer.
  bool demonstrative_slot(std::size_t k) const {
    if (k == 0) return true;
    const Token& prev = tokens_[k - 1];
    if (prev.kind == TokenKind::Punct) return true;
    if (prev.kind != TokenKind::Word) return false;
    const std::string p = lower(k - 1);
    if (lex_.reporting.contains(p) || lowercase_morph_past(k - 1)) return false;
    return lex_.prepositions.contains(p) || p == "and" || p == "or" || p == "but" || p == "nor";
  }

  FeatureTag correlative(std::size_t k, const std::string& w) const {
    if (!is_word(k + 1)) return FeatureTag::Other;
    const std::string_view partner = w == "both" ? "and" : (w == "either" ? "or" : "nor");
    for (std::size_t j = k + 1; j < tokens_.size() && j <= k + 8; ++j) {
      if (tokens_[j].kind == TokenKind::Punct) break;
      if (lower(j) == partner) return FeatureTag::Other;
    }
    return FeatureTag::Determiner;
  }

  std::span<const Token> tokens_;
  const Lexicon& lex_;
  const std::vector<std::string>* lowered_;
};

}  // namespace detail

// Tags one position of a token sequence. index must be < tokens.size().
inline FeatureTag tag_token(std::span<const Token> tokens, std::size_t index, const Lexicon& lexicon) {
  assert(index < tokens.size());
  return detail::TagContext(tokens, lexicon).classify(index);
}

inline std::vector<TaggedToken> tag_document(std::span<const Token> tokens, const Lexicon& lexicon) {
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(detail::ascii_lower(t.surface));
  const detail::TagContext ctx(tokens, lexicon, &lowered);

  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  for (std::size_t k = 0; k < tokens.size(); ++k) out.push_back({tokens[k], ctx.classify(k)});
  return out;
}

inline std::vector<TaggedToken> tag_document(std::span<const Token> tokens) {
  return tag_document(tokens, Lexicon::builtin());
}

}  // namespace stylo
