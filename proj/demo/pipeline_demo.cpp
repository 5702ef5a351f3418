// End-to-end use of the library without the command-line tool: generate a
// synthetic corpus with a known gender effect, score it, draw a matched
// sample and estimate the effect with field and year fixed effects.

#include <cstdio>
#include <map>
#include <set>

#include "stylo/corpus.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/stats.hpp"
#include "stylo/synth.hpp"

int main(int argc, char** argv) {
  stylo::GeneratorConfig cfg;
  cfg.n_docs = argc > 1 ? std::stoul(argv[1]) : 4000;
  cfg.effect_beta = 0.02;
  cfg.seed = 7;
  const auto corpus = stylo::generate(cfg);

  const auto analysis = stylo::analyze_corpus(corpus.documents, stylo::FilterPolicy{});
  std::printf("scored %zu of %zu documents (%zu with an undefined ratio)\n", analysis.rows.size(),
              corpus.documents.size(), analysis.n_undefined);

  const stylo::Table scores = stylo::Table::from_csv(stylo::scores_csv(analysis.rows));
  const auto matched = stylo::match_sample(stylo::candidates_from_scores(scores), 42);
  std::set<std::string> in_sample;
  for (const auto& p : matched.pairs) in_sample.insert({p.female_id, p.male_id});
  std::printf("matched %zu pairs, %zu females unmatched\n", matched.pairs.size(), matched.unmatched_female.size());

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < scores.rows(); ++r)
    if (in_sample.contains(scores.cell(r, "id"))) rows.push_back(r);
  const auto fit = stylo::fit_ols(scores.select_rows(rows), stylo::parse_formula("ratio ~ female | field + year"));
  const auto& b = fit.at("female");
  std::printf("female: %.4f (HC1 SE %.4f, p = %.3g), true effect %.4f\n", b.estimate, b.std_error, b.p_value,
              corpus.summary.beta);

  const auto m = stylo::margins(fit, "female");
  std::printf("predicted ratio %.4f (male) vs %.4f (female): %+.1f%%\n", m.pred_0, m.pred_1, m.pct_diff.value_or(0.0));
}
