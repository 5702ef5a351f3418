#include <gtest/gtest.h>

#include "stylo/report.hpp"
#include "stylo/synth.hpp"

namespace stylo {
namespace {

TEST(Histogram, TwoDocumentsTwoBins) {
  const std::vector<RatioObservation> obs = {{Gender::Female, 0.05}, {Gender::Male, 0.15}};
  const auto h = ratio_histogram(obs, 0.1);
  ASSERT_EQ(h.bins.size(), 2u);
  EXPECT_EQ(h.bins[0].lo, 0.0);
  EXPECT_EQ(h.bins[0].hi, 0.1);
  EXPECT_EQ(h.bins[0].n_female + h.bins[0].n_male, 1u);
  EXPECT_EQ(h.bins[1].n_female + h.bins[1].n_male, 1u);
  EXPECT_EQ(h.bins[0].pct_female, 100.0);
  EXPECT_EQ(h.bins[1].pct_male, 100.0);
}

TEST(Histogram, DecimalEdgesAreHalfOpen) {
  const std::vector<RatioObservation> obs = {{Gender::Female, 0.3}, {Gender::Female, 0.7}, {Gender::Male, 0.1}};
  const auto h = ratio_histogram(obs, 0.1);
  ASSERT_EQ(h.bins.size(), 8u);
  EXPECT_EQ(h.bins[3].n_female, 1u);
  EXPECT_EQ(h.bins[7].n_female, 1u);
  EXPECT_EQ(h.bins[1].n_male, 1u);
  EXPECT_EQ(h.bins[3].lo, 0.3);
}

TEST(Histogram, PercentagesSumToHundredPerGender) {
  auto cfg = GeneratorConfig{};
  cfg.n_docs = 3000;
  std::vector<RatioObservation> obs;
  for (const auto& t : generate_counts(cfg)) obs.push_back({t.gender, compute_scores(t.counts).ratio});
  const auto h = ratio_histogram(obs, 0.05);
  double f = 0, m = 0;
  std::uint64_t n = 0;
  for (const auto& b : h.bins) {
    f += b.pct_female;
    m += b.pct_male;
    n += b.n_female + b.n_male;
  }
  EXPECT_NEAR(f, 100.0, 1e-9);
  EXPECT_NEAR(m, 100.0, 1e-9);
  EXPECT_EQ(n, 3000u);
}

TEST(Histogram, NothingToPlot) {
  EXPECT_THROW(ratio_histogram({}, 0.1), SpecError);
  const std::vector<RatioObservation> undefined = {{Gender::Female, std::nullopt}, {Gender::Unknown, 0.2}};
  try {
    ratio_histogram(undefined, 0.1);
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_STREQ(e.what(), "nothing to plot");
  }
  EXPECT_THROW(ratio_histogram(undefined, 0.0), SpecError);
}

TEST(Histogram, ShiftedFemaleShareRisesAcrossUpperBins) {
  GeneratorConfig cfg;
  cfg.n_docs = 40000;
  cfg.effect_beta = 0.1;
  cfg.strata = {{"f", 2000, 0.5}};
  std::vector<RatioObservation> obs;
  for (const auto& t : generate_counts(cfg)) obs.push_back({t.gender, compute_scores(t.counts).ratio});
  const auto h = ratio_histogram(obs, 0.1);
  // Upper bins: from the bin holding the male mean upward, while well populated.
  const auto start = static_cast<std::size_t>(resolve_truth(cfg).expected_ratio_male / 0.1);
  double prev = -1.0;
  int checked = 0;
  for (std::size_t k = start; k < h.bins.size(); ++k) {
    const auto& b = h.bins[k];
    if (b.n_female + b.n_male < 200) break;
    const double share = b.pct_female / (b.pct_female + b.pct_male);
    EXPECT_GT(share, prev) << "bin " << b.lo;
    prev = share;
    ++checked;
  }
  EXPECT_GE(checked, 3);
}

TEST(Svg, DeterministicAndWellFormed) {
  const std::vector<RatioObservation> obs = {{Gender::Female, 0.05}, {Gender::Male, 0.15}, {Gender::Male, 0.17}};
  const auto h = ratio_histogram(obs, 0.1);
  const auto a = histogram_svg(h);
  EXPECT_EQ(a, histogram_svg(h));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("female (n=1)"), std::string::npos);
  EXPECT_NE(a.find("male (n=2)"), std::string::npos);
  const auto text = histogram_csv(h);
  EXPECT_EQ(text, "bin_lo,bin_hi,n_female,n_male,pct_female,pct_male\n0,0.1,1,0,100,0\n0.1,0.2,0,2,0,100\n");
}

TEST(Svg, CoefficientDotPlot) {
  Table t;
  t.add_numeric("y", {1.0, 2.1, 2.9, 4.2, 5.0, 5.8});
  t.add_numeric("x", {0, 1, 2, 3, 4, 5});
  const auto r = fit_ols(t, parse_formula("y ~ x"));
  const auto svg = coefficient_svg(r);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
  EXPECT_EQ(svg.find("(Intercept)</text>"), std::string::npos);
  EXPECT_NE(coefficient_svg(r, true).find("(Intercept)</text>"), std::string::npos);
}

}  // namespace
}  // namespace stylo
