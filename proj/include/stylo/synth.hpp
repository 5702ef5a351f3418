#pragma once

// Synthetic corpora with known style parameters and gender effects.
//
// Each document draws its stratum, gender, length and per-class counts from
// its own seeded stream; the counts are then rendered as text through
// disjoint per-class vocabularies, so tokenizing and tagging the text gives
// back exactly the drawn counts. The counts-only path stops after the draw
// and yields the same counts without building text.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stylo/corpus.hpp"
#include "stylo/error.hpp"
#include "stylo/io.hpp"
#include "stylo/parallel.hpp"
#include "stylo/random.hpp"
#include "stylo/stylometry.hpp"
#include "stylo/table.hpp"

namespace stylo {

// Per-token probabilities of the six feature classes; the remainder is OTHER.
struct FeatureRates {
  double pron = 0.0;
  double and_coord = 0.0;
  double question = 0.0;
  double det = 0.0;
  double past = 0.0;
  double num = 0.0;

  double involved() const { return pron + and_coord + question; }
  double informational() const { return det + past + num; }

  friend bool operator==(const FeatureRates&, const FeatureRates&) = default;
};

// Female paper means (per 100 tokens): involved 4.78, informational 15.96.
inline FeatureRates female_paper_rates() { return {0.0160, 0.0315, 0.0003, 0.0994, 0.0450, 0.0152}; }

// Male paper means: involved 4.55, informational 16.13.
inline FeatureRates male_paper_rates() { return {0.0158, 0.0294, 0.0003, 0.1014, 0.0445, 0.0154}; }

struct StratumSpec {
  std::string field;
  int year = 0;
  double female_share = 0.5;

  friend bool operator==(const StratumSpec&, const StratumSpec&) = default;
};

inline std::vector<StratumSpec> default_strata() {
  const std::array<std::pair<const char*, double>, 4> fields = {
      {{"biology", 0.45}, {"chemistry", 0.35}, {"economics", 0.3}, {"psychology", 0.55}}};
  std::vector<StratumSpec> out;
  for (const auto& [field, share] : fields)
    for (int year = 2010; year < 2015; ++year) out.push_back({field, year, share});
  return out;
}

struct GeneratorConfig {
  std::size_t n_docs = 1000;
  std::vector<StratumSpec> strata = default_strata();
  FeatureRates base_rates = male_paper_rates();
  // Additive shift on the total involved probability of female documents,
  // spread over pronouns, "and" and questions in proportion to base_rates.
  std::optional<double> gender_shift;
  // Target difference in expected ratio, female minus male; solved into a shift.
  std::optional<double> effect_beta;
  double homophily = 0.5;
  double mean_citations = 8.0;
  std::size_t min_tokens = 130;
  std::size_t max_tokens = 170;
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kMinSynthWords = 101;

// Per-document ground truth, keyed by id in the sidecar.
struct DocTruth {
  std::string id;
  Gender gender = Gender::Unknown;
  std::string field;
  int year = 0;
  FeatureCounts counts;

  friend bool operator==(const DocTruth&, const DocTruth&) = default;
};

// Corpus-level truth implied by the configuration.
struct GeneratorTruth {
  double gender_shift = 0.0;
  FeatureRates female_rates;
  FeatureRates male_rates;
  double expected_ratio_female = 0.0;
  double expected_ratio_male = 0.0;
  double beta = 0.0;  // expected ratio difference, female minus male
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<DocTruth> truth;
  GeneratorTruth summary;
};

namespace synth_detail {

inline constexpr std::array<std::string_view, 10> kPronouns = {"they", "we",  "he", "she",  "them",
                                                              "him",  "you", "it", "their", "its"};
inline constexpr std::array<std::string_view, 10> kDeterminers = {"the",  "a",     "an",   "this", "these",
                                                                 "those", "each", "every", "some", "another"};
inline constexpr std::array<std::string_view, 16> kPastVerbs = {
    "measured", "observed", "estimated", "reported", "compared",   "tested", "recorded",  "examined",
    "collected", "sampled", "modeled",   "derived",  "identified", "analyzed", "evaluated", "computed"};
inline constexpr std::array<std::string_view, 24> kOtherWords = {
    "blick", "frond", "quarn", "smolt", "treck", "vorn",  "glim",  "plosk", "drave", "mirth", "solk",  "brin",
    "tusk",  "welm",  "crast", "yorn",  "flim",  "starn", "pleck", "gorm",  "swale", "nimb",  "thrip", "klon"};
inline constexpr std::array<std::string_view, 8> kFemaleFirst = {"Alice", "Maria", "Sofia", "Grace",
                                                                  "Elena", "Nora",  "Julia", "Clara"};
inline constexpr std::array<std::string_view, 8> kMaleFirst = {"David", "Peter", "James", "Lucas",
                                                                "Martin", "Hugo", "Oscar", "Felix"};

enum Cls : std::uint8_t { kPron, kAnd, kQ, kDet, kPast, kNum, kOther };

inline Gender opposite(Gender g) { return g == Gender::Female ? Gender::Male : Gender::Female; }

inline FeatureRates shifted(const FeatureRates& r, double shift) {
  FeatureRates out = r;
  const double inv = r.involved();
  out.pron += shift * r.pron / inv;
  out.and_coord += shift * r.and_coord / inv;
  out.question += shift * r.question / inv;
  return out;
}

inline void check_rates(const FeatureRates& r, std::string_view who) {
  for (double p : {r.pron, r.and_coord, r.question, r.det, r.past, r.num})
    if (!(p >= 0.0 && p <= 1.0)) throw SpecError(std::string(who) + " feature probabilities must lie in [0,1]");
  if (r.involved() + r.informational() > 1.0 + 1e-12)
    throw SpecError(std::string(who) + " feature probabilities sum to more than 1");
}

inline std::string doc_id(std::size_t i) { return "synth-" + std::to_string(i); }

struct Draw {
  const StratumSpec* stratum = nullptr;
  Gender gender = Gender::Unknown;
  FeatureCounts counts;
};

// Stratum, gender, length, then counts by sequential conditional binomials.
inline Draw draw_counts(Rng& rng, const GeneratorConfig& cfg, const GeneratorTruth& truth) {
  Draw d;
  d.stratum = &cfg.strata[rng.below(cfg.strata.size())];
  d.gender = rng.bernoulli(d.stratum->female_share) ? Gender::Female : Gender::Male;
  const FeatureRates& r = d.gender == Gender::Female ? truth.female_rates : truth.male_rates;
  const auto length = static_cast<std::uint64_t>(
      rng.between(static_cast<std::int64_t>(cfg.min_tokens), static_cast<std::int64_t>(cfg.max_tokens)));
  std::uint64_t remaining = length;
  double mass = 1.0;
  std::array<std::uint64_t, 6> n{};
  const std::array<double, 6> p = {r.pron, r.and_coord, r.question, r.det, r.past, r.num};
  for (std::size_t k = 0; k < 6; ++k) {
    const double cond = mass > 0.0 ? std::min(1.0, p[k] / mass) : 0.0;
    n[k] = rng.binomial(remaining, cond);
    remaining -= n[k];
    mass -= p[k];
  }
  d.counts = {n[0], n[1], n[2], n[3], n[4], n[5], length};
  // Questions are punctuation; pad with OTHER words to keep the word floor.
  const std::uint64_t words = length - n[2];
  if (words < kMinSynthWords) d.counts.n_tokens += kMinSynthWords - words;
  return d;
}

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& words) {
  return words[rng.below(N)];
}

inline std::string render(Rng& rng, const FeatureCounts& c) {
  std::vector<Cls> seq;
  seq.reserve(c.n_tokens);
  seq.insert(seq.end(), c.n_pron, kPron);
  seq.insert(seq.end(), c.n_and, kAnd);
  seq.insert(seq.end(), c.n_q, kQ);
  seq.insert(seq.end(), c.n_det, kDet);
  seq.insert(seq.end(), c.n_past, kPast);
  seq.insert(seq.end(), c.n_num, kNum);
  seq.insert(seq.end(), c.n_tokens - seq.size(), kOther);
  rng.shuffle(std::span<Cls>(seq));
  std::string text;
  text.reserve(seq.size() * 7);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) text.push_back(' ');
    switch (seq[i]) {
      case kPron: text += pick(rng, kPronouns); break;
      case kAnd: text += "and"; break;
      case kQ: text += "?"; break;
      case kDet: text += pick(rng, kDeterminers); break;
      case kPast: text += pick(rng, kPastVerbs); break;
      case kNum: text += std::to_string(rng.between(2, 9999)); break;
      case kOther: text += pick(rng, kOtherWords); break;
    }
  }
  return text;
}

}  // namespace synth_detail

// E[(L - Y) / Y | Y > 0] for Y ~ Binomial(L, p_inf), L uniform on
// [min_tokens, max_tokens]. Conditional on Y the involved count is binomial
// on the remaining L - Y tokens, so E[ratio] = q * this with
// q = p_inv / (1 - p_inf).
inline double ratio_scale(double p_inf, std::size_t min_tokens, std::size_t max_tokens) {
  if (!(p_inf > 0.0 && p_inf < 1.0)) throw SpecError("informational probability must lie in (0,1)");
  double num = 0.0, den = 0.0;
  for (std::size_t len = min_tokens; len <= max_tokens; ++len) {
    const double L = static_cast<double>(len);
    for (std::size_t y = 1; y <= len; ++y) {
      const double Y = static_cast<double>(y);
      const double w = std::exp(std::lgamma(L + 1) - std::lgamma(Y + 1) - std::lgamma(L - Y + 1) +
                                Y * std::log(p_inf) + (L - Y) * std::log1p(-p_inf));
      num += w * (L - Y) / Y;
      den += w;
    }
  }
  return num / den;
}

inline double expected_ratio(const FeatureRates& r, std::size_t min_tokens, std::size_t max_tokens) {
  return r.involved() / (1.0 - r.informational()) * ratio_scale(r.informational(), min_tokens, max_tokens);
}

// Validates the configuration and resolves the shift and implied truth.
inline GeneratorTruth resolve_truth(const GeneratorConfig& cfg) {
  if (cfg.n_docs == 0) throw SpecError("n_docs must be positive");
  if (cfg.strata.empty()) throw SpecError("at least one stratum is required");
  for (const auto& s : cfg.strata)
    if (!(s.female_share >= 0.0 && s.female_share <= 1.0))
      throw SpecError("female_share must lie in [0,1] (stratum " + s.field + "/" + std::to_string(s.year) + ")");
  if (cfg.min_tokens < kMinSynthWords || cfg.max_tokens < cfg.min_tokens)
    throw SpecError("token range must satisfy " + std::to_string(kMinSynthWords) + " <= min_tokens <= max_tokens");
  if (!(cfg.homophily >= 0.0 && cfg.homophily <= 1.0)) throw SpecError("homophily must lie in [0,1]");
  if (!(cfg.mean_citations >= 0.0 && std::isfinite(cfg.mean_citations)))
    throw SpecError("mean_citations must be non-negative");
  if (cfg.gender_shift && cfg.effect_beta) throw SpecError("set gender_shift or effect_beta, not both");
  synth_detail::check_rates(cfg.base_rates, "base");
  if (cfg.base_rates.involved() <= 0.0) throw SpecError("base involved probability must be positive");

  GeneratorTruth t;
  t.male_rates = cfg.base_rates;
  const double p_inf = cfg.base_rates.informational();
  const double scale = ratio_scale(p_inf, cfg.min_tokens, cfg.max_tokens);
  if (cfg.effect_beta) {
    t.gender_shift = *cfg.effect_beta * (1.0 - p_inf) / scale;
  } else {
    t.gender_shift = cfg.gender_shift.value_or(0.0);
  }
  t.female_rates = synth_detail::shifted(cfg.base_rates, t.gender_shift);
  synth_detail::check_rates(t.female_rates, "female");
  t.expected_ratio_male = t.male_rates.involved() / (1.0 - p_inf) * scale;
  t.expected_ratio_female = t.female_rates.involved() / (1.0 - p_inf) * scale;
  t.beta = t.expected_ratio_female - t.expected_ratio_male;
  return t;
}

// Counts and labels only, identical to the truth sidecar of generate().
inline std::vector<DocTruth> generate_counts(const GeneratorConfig& cfg, unsigned threads = 1) {
  const GeneratorTruth truth = resolve_truth(cfg);
  std::vector<DocTruth> out(cfg.n_docs);
  parallel_for(cfg.n_docs, threads, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, synth_detail::doc_id(i)));
    const auto d = synth_detail::draw_counts(rng, cfg, truth);
    out[i] = {synth_detail::doc_id(i), d.gender, d.stratum->field, d.stratum->year, d.counts};
  });
  return out;
}

inline SyntheticCorpus generate(const GeneratorConfig& cfg, unsigned threads = 1) {
  SyntheticCorpus corpus;
  corpus.summary = resolve_truth(cfg);
  corpus.documents.resize(cfg.n_docs);
  corpus.truth.resize(cfg.n_docs);
  parallel_for(cfg.n_docs, threads, [&](std::size_t i) {
    using namespace synth_detail;
    Rng rng(derive_seed(cfg.seed, doc_id(i)));
    const auto d = draw_counts(rng, cfg, corpus.summary);
    corpus.truth[i] = {doc_id(i), d.gender, d.stratum->field, d.stratum->year, d.counts};

    Document& doc = corpus.documents[i];
    doc.id = doc_id(i);
    doc.kind = DocKind::Paper;
    doc.text = render(rng, d.counts);
    doc.field = d.stratum->field;
    doc.year = d.stratum->year;
    doc.language = "en";
    const std::string_view first = d.gender == Gender::Female ? pick(rng, kFemaleFirst) : pick(rng, kMaleFirst);
    doc.authors.push_back({{std::string(first), "", "Author" + std::to_string(i)}, d.gender, "author-" + std::to_string(i)});
    const auto n_cites = rng.poisson(cfg.mean_citations);
    for (std::uint64_t c = 0; c < n_cites; ++c) {
      CitingRecord r;
      r.citing_doc_id = "cite-" + std::to_string(i) + "-" + std::to_string(c);
      r.first_author_gender = rng.bernoulli(cfg.homophily) ? d.gender : opposite(d.gender);
      r.last_author_gender = rng.bernoulli(cfg.homophily) ? d.gender : opposite(d.gender);
      r.citing_author_ids = {"citer-" + std::to_string(i) + "-" + std::to_string(c)};
      doc.cited_by.push_back(std::move(r));
    }
  });
  return corpus;
}

// ---------------------------------------------------------------- export

inline std::string truth_jsonl(std::span<const DocTruth> truth) {
  std::string out;
  for (const auto& t : truth) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["gender"] = std::string(to_string(t.gender));
    j["field"] = t.field;
    j["year"] = t.year;
    j["n_pron"] = t.counts.n_pron;
    j["n_and"] = t.counts.n_and;
    j["n_q"] = t.counts.n_q;
    j["n_det"] = t.counts.n_det;
    j["n_past"] = t.counts.n_past;
    j["n_num"] = t.counts.n_num;
    j["n_tokens"] = t.counts.n_tokens;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

inline std::vector<DocTruth> parse_truth_jsonl(std::string_view text) {
  std::vector<DocTruth> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DocTruth t;
      t.id = j.at("id").get<std::string>();
      t.gender = parse_gender(j.at("gender").get<std::string>()).value_or(Gender::Unknown);
      t.field = j.at("field").get<std::string>();
      t.year = j.at("year").get<int>();
      t.counts = {j.at("n_pron").get<std::uint64_t>(), j.at("n_and").get<std::uint64_t>(),
                  j.at("n_q").get<std::uint64_t>(),    j.at("n_det").get<std::uint64_t>(),
                  j.at("n_past").get<std::uint64_t>(), j.at("n_num").get<std::uint64_t>(),
                  j.at("n_tokens").get<std::uint64_t>()};
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const FeatureRates& r) {
  return {{"pron", r.pron}, {"and", r.and_coord}, {"question", r.question},
          {"det", r.det},   {"past", r.past},     {"num", r.num}};
}

inline nlohmann::ordered_json to_json(const GeneratorTruth& t) {
  return {{"gender_shift", t.gender_shift},
          {"female_rates", to_json(t.female_rates)},
          {"male_rates", to_json(t.male_rates)},
          {"expected_ratio_female", t.expected_ratio_female},
          {"expected_ratio_male", t.expected_ratio_male},
          {"beta", t.beta}};
}

// Regression-ready table: id, female, field, year, rates and ratio (empty
// when undefined).
inline Table truth_table(std::span<const DocTruth> truth) {
  std::vector<std::string> ids, female, field, year, involved, informational, ratio;
  for (const auto& t : truth) {
    const auto s = compute_scores(t.counts);
    ids.push_back(t.id);
    female.push_back(t.gender == Gender::Female ? "1" : "0");
    field.push_back(t.field);
    year.push_back(std::to_string(t.year));
    involved.push_back(format_double(s.involved_rate));
    informational.push_back(format_double(s.informational_rate));
    ratio.push_back(s.ratio ? format_double(*s.ratio) : std::string());
  }
  Table table;
  table.add_column("id", std::move(ids));
  table.add_column("female", std::move(female));
  table.add_column("field", std::move(field));
  table.add_column("year", std::move(year));
  table.add_column("involved_rate", std::move(involved));
  table.add_column("informational_rate", std::move(informational));
  table.add_column("ratio", std::move(ratio));
  return table;
}

}  // namespace stylo
