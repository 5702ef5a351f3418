#pragma once

// Corpus scoring: filter, tokenize, tag and score each document once, in
// parallel, with rows kept in input order.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylo/corpus.hpp"
#include "stylo/io.hpp"
#include "stylo/lexicon.hpp"
#include "stylo/parallel.hpp"
#include "stylo/stylometry.hpp"
#include "stylo/table.hpp"
#include "stylo/tagger.hpp"

namespace stylo {

inline constexpr std::string_view kStatusKept = "KEPT";
inline constexpr std::string_view kStatusUndefined = "UNDEFINED_RATIO";

struct ScoreRow {
  std::string id;
  DocKind kind = DocKind::Paper;
  std::string field;
  int year = 0;
  Gender gender = Gender::Unknown;
  std::optional<Gender> lawyer_gender;  // set for documents with exactly one lawyer
  FeatureCounts counts;
  StyleScores scores;

  std::string_view status() const { return scores.ratio ? kStatusKept : kStatusUndefined; }
};

struct AnalysisResult {
  std::vector<ScoreRow> rows;    // kept documents, input order
  FilterResult filter;           // kept documents plus drop reasons
  std::size_t n_undefined = 0;   // kept rows whose ratio is undefined
};

inline AnalysisResult analyze_corpus(std::span<const Document> docs, const FilterPolicy& policy, unsigned threads = 1,
                                     const Lexicon& lexicon = Lexicon::builtin()) {
  std::vector<std::optional<DropReason>> verdict(docs.size());
  std::vector<ScoreRow> scored(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    const Document& d = docs[i];
    if ((verdict[i] = check_metadata(d, policy))) return;
    const auto tokens = tokenize(d.text);
    if (word_count(tokens) <= policy.min_words) {
      verdict[i] = DropReason::WordCount;
      return;
    }
    ScoreRow& row = scored[i];
    row.id = d.id;
    row.kind = d.kind;
    row.field = d.field;
    row.year = d.year;
    row.gender = author_gender(d);
    if (d.lawyers.size() == 1) row.lawyer_gender = d.lawyers.front().gender.value_or(Gender::Unknown);
    row.counts = count_features(tag_document(tokens, lexicon));
    row.scores = compute_scores(row.counts);
  }, 16);

  AnalysisResult out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (verdict[i]) {
      out.filter.dropped.push_back({docs[i].id, *verdict[i]});
      continue;
    }
    out.filter.kept.push_back(docs[i]);
    out.n_undefined += !scored[i].scores.ratio;
    out.rows.push_back(std::move(scored[i]));
  }
  return out;
}

inline std::vector<std::string> scores_csv_header() {
  return {"id",     "kind",   "field",  "year",    "gender", "female", "lawyer_gender", "lawyer_female",
          "n_pron", "n_and",  "n_q",    "n_det",   "n_past", "n_num",  "n_tokens",      "involved_rate",
          "informational_rate", "ratio", "status"};
}

namespace pipeline_detail {
inline std::string dummy(std::optional<Gender> g) {
  if (!g || *g == Gender::Unknown) return {};
  return *g == Gender::Female ? "1" : "0";
}
}  // namespace pipeline_detail

// Undefined ratios and unknown genders are written as empty cells, which
// regression input treats as missing.
inline std::string scores_csv(std::span<const ScoreRow> rows) {
  std::string out = csv::join(scores_csv_header());
  for (const auto& r : rows) {
    const auto& c = r.counts;
    out += csv::join({r.id,
                      std::string(to_string(r.kind)),
                      r.field,
                      std::to_string(r.year),
                      std::string(to_string(r.gender)),
                      pipeline_detail::dummy(r.gender),
                      r.lawyer_gender ? std::string(to_string(*r.lawyer_gender)) : std::string(),
                      pipeline_detail::dummy(r.lawyer_gender),
                      std::to_string(c.n_pron),
                      std::to_string(c.n_and),
                      std::to_string(c.n_q),
                      std::to_string(c.n_det),
                      std::to_string(c.n_past),
                      std::to_string(c.n_num),
                      std::to_string(c.n_tokens),
                      format_double(r.scores.involved_rate),
                      format_double(r.scores.informational_rate),
                      r.scores.ratio ? format_double(*r.scores.ratio) : std::string(),
                      std::string(r.status())});
  }
  return out;
}

// Match candidates from a scores table (columns id, field, year, gender).
inline std::vector<MatchCandidate> candidates_from_scores(const Table& scores) {
  const auto& id = scores.column("id");
  const auto& field = scores.column("field");
  const auto& year = scores.column("year");
  const auto& gender = scores.column("gender");
  std::vector<MatchCandidate> out;
  out.reserve(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto y = parse_int(year[r]);
    if (!y) throw DataError("scores row " + std::to_string(r + 2) + ": invalid year '" + year[r] + "'");
    const auto g = parse_gender(gender[r]);
    if (!g) throw DataError("scores row " + std::to_string(r + 2) + ": invalid gender '" + gender[r] + "'");
    out.push_back({id[r], field[r], static_cast<int>(*y), *g});
  }
  return out;
}

}  // namespace stylo
