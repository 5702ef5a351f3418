// Scores the text on standard input and prints the feature counts, both
// rates and the involved-to-informational ratio.
//
//   echo "Why do firms pay dividends? We examined 28 firms." | ./score_text

#include <iostream>
#include <iterator>
#include <string>

#include "stylo/stylometry.hpp"

int main() {
  const std::string text{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  const auto counts = stylo::analyze_text(text, stylo::Lexicon::builtin());
  if (counts.n_tokens == 0) {
    std::cerr << "no tokens on standard input\n";
    return 1;
  }
  const auto s = stylo::compute_scores(counts);
  std::cout << "tokens         " << counts.n_tokens << '\n'
            << "pronouns       " << counts.n_pron << '\n'
            << "and            " << counts.n_and << '\n'
            << "questions      " << counts.n_q << '\n'
            << "determiners    " << counts.n_det << '\n'
            << "past verbs     " << counts.n_past << '\n'
            << "cardinals      " << counts.n_num << '\n'
            << "involved       " << s.involved_rate << " per 100 tokens\n"
            << "informational  " << s.informational_rate << " per 100 tokens\n"
            << "ratio          " << (s.ratio ? std::to_string(*s.ratio) : "undefined") << '\n';
}
