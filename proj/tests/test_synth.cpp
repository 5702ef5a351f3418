#include <gtest/gtest.h>

#include <cmath>

#include "stylo/citation.hpp"
#include "stylo/stats.hpp"
#include "stylo/synth.hpp"
#include "stylo/tagger.hpp"

namespace stylo {
namespace {

GeneratorConfig small(std::size_t n, std::uint64_t seed) {
  GeneratorConfig c;
  c.n_docs = n;
  c.seed = seed;
  return c;
}

TEST(Binomial, MatchesExactPmf) {
  Rng rng(17);
  const std::uint64_t n = 150;
  const double p = 0.1;
  std::vector<double> observed(n + 1, 0.0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) observed[rng.binomial(n, p)] += 1.0;
  // Pool the tails so every expected cell holds at least 5 draws.
  double chi2 = 0.0, tail_obs = 0.0, tail_exp = 0.0;
  int cells = 0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                k * std::log(p) + (n - k) * std::log1p(-p));
    const double expected = pmf * draws;
    if (expected < 5.0) {
      tail_obs += observed[k];
      tail_exp += expected;
      continue;
    }
    chi2 += (observed[k] - expected) * (observed[k] - expected) / expected;
    ++cells;
  }
  chi2 += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
  ++cells;
  // Far above the 99.9% quantile of chi-square with ~30 dof (~59.7).
  EXPECT_LT(chi2, 70.0) << cells << " cells";
  EXPECT_EQ(rng.binomial(0, 0.3), 0u);
  EXPECT_EQ(rng.binomial(9, 1.0), 9u);
  EXPECT_EQ(rng.binomial(9, 0.0), 0u);
}

TEST(Generate, TaggerRecoversTruthExactly) {
  const auto corpus = generate(small(400, 3));
  ASSERT_EQ(corpus.documents.size(), 400u);
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto& doc = corpus.documents[i];
    const auto tokens = tokenize(doc.text);
    ASSERT_EQ(count_features(tag_document(tokens)), corpus.truth[i].counts) << doc.id << ": " << doc.text;
    ASSERT_GE(word_count(tokens), kMinSynthWords);
  }
}

TEST(Generate, DocumentsPassTheDefaultFilter) {
  const auto corpus = generate(small(300, 4));
  const auto kept = filter_corpus(corpus.documents, paper_default_policy());
  EXPECT_EQ(kept.kept.size(), 300u);
}

TEST(Generate, DeterministicAcrossThreads) {
  const auto a = generate(small(700, 5), 1);
  const auto b = generate(small(700, 5), 4);
  EXPECT_EQ(export_jsonl(a.documents), export_jsonl(b.documents));
  EXPECT_EQ(truth_jsonl(a.truth), truth_jsonl(b.truth));
  EXPECT_NE(export_jsonl(a.documents), export_jsonl(generate(small(700, 6)).documents));
}

TEST(Generate, CountsOnlyPathMatchesFullGeneration) {
  auto cfg = small(500, 7);
  cfg.effect_beta = 0.02;
  EXPECT_EQ(generate_counts(cfg, 3), generate(cfg).truth);
}

TEST(Generate, CorpusSurvivesJsonlRoundTrip) {
  const auto corpus = generate(small(50, 8));
  const auto back = ingest_jsonl_text(export_jsonl(corpus.documents));
  EXPECT_TRUE(back.rejects.empty());
  EXPECT_EQ(back.documents, corpus.documents);
  EXPECT_EQ(parse_truth_jsonl(truth_jsonl(corpus.truth)), corpus.truth);
}

TEST(Generate, FullHomophilyMeansSameGenderCiters) {
  auto cfg = small(400, 9);
  cfg.homophily = 1.0;
  const auto corpus = generate(cfg);
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto p = decompose(corpus.documents[i]);
    if (p.imputed_zero) continue;
    if (corpus.truth[i].gender == Gender::Female) {
      EXPECT_EQ(p.rate_female_first, 100.0);
      EXPECT_EQ(p.rate_female_last, 100.0);
    } else {
      EXPECT_EQ(p.rate_male_first, 100.0);
    }
    EXPECT_EQ(p.self_citations, 0u);
  }
}

TEST(Generate, CalibratedMeansWithinTwoStandardErrors) {
  auto cfg = small(5000, 10);
  cfg.base_rates = female_paper_rates();
  const auto truth = generate_counts(cfg);
  double s_inv = 0, ss_inv = 0, s_inf = 0, ss_inf = 0;
  for (const auto& t : truth) {
    const auto s = compute_scores(t.counts);
    s_inv += s.involved_rate;
    ss_inv += s.involved_rate * s.involved_rate;
    s_inf += s.informational_rate;
    ss_inf += s.informational_rate * s.informational_rate;
  }
  const double n = static_cast<double>(truth.size());
  auto check = [&](double sum, double sumsq, double target) {
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
    EXPECT_LT(std::fabs(mean - target), 2.0 * se) << "mean " << mean << " target " << target;
  };
  check(s_inv, ss_inv, 4.78);
  check(s_inf, ss_inf, 15.96);
}

TEST(Truth, ExpectedRatioAgreesWithSimulation) {
  auto cfg = small(40000, 11);
  cfg.effect_beta = 0.05;
  const auto summary = resolve_truth(cfg);
  EXPECT_NEAR(summary.beta, 0.05, 1e-12);
  const auto truth = generate_counts(cfg);
  double sf = 0, ssf = 0, sm = 0, ssm = 0, nf = 0, nm = 0;
  for (const auto& t : truth) {
    const auto r = compute_scores(t.counts).ratio;
    ASSERT_TRUE(r);
    if (t.gender == Gender::Female) {
      sf += *r, ssf += *r * *r, ++nf;
    } else {
      sm += *r, ssm += *r * *r, ++nm;
    }
  }
  const double mf = sf / nf, mm = sm / nm;
  const double se_f = std::sqrt((ssf / nf - mf * mf) / nf), se_m = std::sqrt((ssm / nm - mm * mm) / nm);
  EXPECT_LT(std::fabs(mf - summary.expected_ratio_female), 3.0 * se_f);
  EXPECT_LT(std::fabs(mm - summary.expected_ratio_male), 3.0 * se_m);
}

TEST(Truth, RatioScaleAgreesWithDirectSum) {
  // Single length, small enough to enumerate Y exactly with a recurrence.
  const double p = 0.16;
  const std::size_t L = 120;
  double pmf = std::pow(1.0 - p, static_cast<double>(L)), num = 0.0, den = 0.0;
  for (std::size_t y = 1; y <= L; ++y) {
    pmf *= p / (1.0 - p) * static_cast<double>(L - y + 1) / static_cast<double>(y);
    num += pmf * static_cast<double>(L - y) / static_cast<double>(y);
    den += pmf;
  }
  EXPECT_NEAR(ratio_scale(p, L, L), num / den, 1e-12);
}

TEST(Config, InvalidSettingsAreRejected) {
  auto cfg = small(10, 1);
  cfg.effect_beta = 0.02;
  cfg.gender_shift = 0.01;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(10, 1);
  cfg.gender_shift = -0.5;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(10, 1);
  cfg.base_rates.det = 0.95;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(10, 1);
  cfg.min_tokens = 80;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(0, 1);
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(10, 1);
  cfg.homophily = 1.5;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
  cfg = small(10, 1);
  cfg.strata.front().female_share = -0.1;
  EXPECT_THROW(resolve_truth(cfg), SpecError);
}

TEST(NullEffect, FalseSignificanceRateStaysNominal) {
  int significant = 0;
  auto spec = parse_formula("ratio ~ female | field + year");
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto cfg = small(2000, seed);
    cfg.gender_shift = 0.0;
    const auto fit = fit_ols(truth_table(generate_counts(cfg)), spec);
    significant += fit.at("female").p_value < 0.05;
  }
  EXPECT_LE(significant, 10);
}

}  // namespace
}  // namespace stylo
