#pragma once

// Incoming citations broken down by the gender of the citing document's first
// and last author, as rates per 100 non-self citations.

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stylo/corpus.hpp"
#include "stylo/io.hpp"
#include "stylo/parallel.hpp"

namespace stylo {

// Unknown-gender citers stay in the denominator.
inline constexpr std::string_view kCitationDenominatorPolicy = "all-non-self-citations";

struct CitationProfile {
  std::string doc_id;
  std::uint64_t total_cites = 0;  // after self-citation exclusion
  std::uint64_t self_citations = 0;
  std::uint64_t n_female_first = 0, n_male_first = 0, n_female_last = 0, n_male_last = 0;
  double rate_female_first = 0.0;
  double rate_male_first = 0.0;
  double rate_female_last = 0.0;
  double rate_male_last = 0.0;
  bool imputed_zero = true;

  friend bool operator==(const CitationProfile&, const CitationProfile&) = default;
};

inline bool is_self_citation(const CitingRecord& c, const std::set<std::string, std::less<>>& own_ids) {
  return std::any_of(c.citing_author_ids.begin(), c.citing_author_ids.end(),
                     [&](const std::string& id) { return own_ids.contains(id); });
}

inline CitationProfile decompose(const Document& doc) {
  CitationProfile p;
  p.doc_id = doc.id;
  std::set<std::string, std::less<>> own;
  for (const auto& a : doc.authors) own.insert(author_key(a));
  for (const auto& c : doc.cited_by) {
    if (is_self_citation(c, own)) {
      ++p.self_citations;
      continue;
    }
    ++p.total_cites;
    p.n_female_first += c.first_author_gender == Gender::Female;
    p.n_male_first += c.first_author_gender == Gender::Male;
    p.n_female_last += c.last_author_gender == Gender::Female;
    p.n_male_last += c.last_author_gender == Gender::Male;
  }
  p.imputed_zero = p.total_cites == 0;
  if (!p.imputed_zero) {
    const auto total = static_cast<double>(p.total_cites);
    auto rate = [&](std::uint64_t n) { return 100.0 * static_cast<double>(n) / total; };
    p.rate_female_first = rate(p.n_female_first);
    p.rate_male_first = rate(p.n_male_first);
    p.rate_female_last = rate(p.n_female_last);
    p.rate_male_last = rate(p.n_male_last);
  }
  return p;
}

inline std::vector<CitationProfile> decompose_all(std::span<const Document> docs, unsigned threads = 1) {
  std::vector<CitationProfile> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { out[i] = decompose(docs[i]); });
  return out;
}

inline std::vector<std::string> citation_csv_header() {
  return {"doc_id",           "total_cites",     "rate_female_first", "rate_male_first",
          "rate_female_last", "rate_male_last",  "imputed_zero"};
}

inline std::vector<std::string> citation_csv_row(const CitationProfile& p) {
  return {p.doc_id,
          std::to_string(p.total_cites),
          format_double(p.rate_female_first),
          format_double(p.rate_male_first),
          format_double(p.rate_female_last),
          format_double(p.rate_male_last),
          p.imputed_zero ? "1" : "0"};
}

inline std::string citation_csv(std::span<const CitationProfile> profiles) {
  std::string out = csv::join(citation_csv_header());
  for (const auto& p : profiles) out += csv::join(citation_csv_row(p));
  return out;
}

}  // namespace stylo
