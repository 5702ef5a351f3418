#pragma once

// Involved and informational feature rates, per 100 tokens:
//   involved      = (pronouns + "and" + "?") / tokens * 100
//   informational = (determiners + past verbs + cardinals) / tokens * 100
//   ratio         = involved / informational, undefined when informational is 0
// The denominator counts every token, punctuation included.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "stylo/error.hpp"
#include "stylo/tagger.hpp"

namespace stylo {

inline constexpr std::string_view kDenominatorPolicy = "all-tokens";

struct FeatureCounts {
  std::uint64_t n_pron = 0;
  std::uint64_t n_and = 0;
  std::uint64_t n_q = 0;
  std::uint64_t n_det = 0;
  std::uint64_t n_past = 0;
  std::uint64_t n_num = 0;
  std::uint64_t n_tokens = 0;

  std::uint64_t involved() const { return n_pron + n_and + n_q; }
  std::uint64_t informational() const { return n_det + n_past + n_num; }

  FeatureCounts& operator+=(const FeatureCounts& o) {
    n_pron += o.n_pron;
    n_and += o.n_and;
    n_q += o.n_q;
    n_det += o.n_det;
    n_past += o.n_past;
    n_num += o.n_num;
    n_tokens += o.n_tokens;
    return *this;
  }

  friend bool operator==(const FeatureCounts&, const FeatureCounts&) = default;
};

struct StyleScores {
  double involved_rate = 0.0;
  double informational_rate = 0.0;
  std::optional<double> ratio;  // empty when the informational rate is zero

  bool ratio_defined() const { return ratio.has_value(); }
};

inline void count_tag(FeatureCounts& c, FeatureTag tag) {
  switch (tag) {
    case FeatureTag::Pronoun: ++c.n_pron; break;
    case FeatureTag::AndCoord: ++c.n_and; break;
    case FeatureTag::Question: ++c.n_q; break;
    case FeatureTag::Determiner: ++c.n_det; break;
    case FeatureTag::PastVerb: ++c.n_past; break;
    case FeatureTag::Cardinal: ++c.n_num; break;
    case FeatureTag::Other: break;
  }
  ++c.n_tokens;
}

inline FeatureCounts count_features(std::span<const TaggedToken> tagged) {
  FeatureCounts c;
  for (const auto& t : tagged) count_tag(c, t.tag);
  return c;
}

inline FeatureCounts count_features(std::span<const FeatureTag> tags) {
  FeatureCounts c;
  for (auto t : tags) count_tag(c, t);
  return c;
}

// Throws SpecError("empty document") when n_tokens is 0.
inline StyleScores compute_scores(const FeatureCounts& c) {
  if (c.n_tokens == 0) throw SpecError("empty document");
  const auto tokens = static_cast<double>(c.n_tokens);
  StyleScores s;
  // Multiply before dividing: 100*k is exact in double, leaving one rounding step.
  s.involved_rate = 100.0 * static_cast<double>(c.involved()) / tokens;
  s.informational_rate = 100.0 * static_cast<double>(c.informational()) / tokens;
  if (c.informational() > 0)
    s.ratio = static_cast<double>(c.involved()) / static_cast<double>(c.informational());
  return s;
}

// Tokenize, tag and count one text.
inline FeatureCounts analyze_text(std::string_view text, const Lexicon& lexicon) {
  const auto tokens = tokenize(text);
  return count_features(tag_document(tokens, lexicon));
}

}  // namespace stylo
