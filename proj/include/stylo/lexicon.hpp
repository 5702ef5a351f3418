#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stylo/builtin_data.hpp"
#include "stylo/error.hpp"

namespace stylo {

// Context rules for closed-class words whose feature class depends on neighbours.
enum class AmbiguityRule {
  ThatContext,                 // demonstrative vs. relativizer/complementizer
  WhContext,                   // wh-determiner before a noun, wh-pronoun otherwise
  AlwaysPronoun,               // her (PRP and PRP$ fold together)
  AlwaysDeterminer,            // all (DT and PDT fold together)
  Correlative,                 // both/either/neither: CC inside "both X and Y"
  PredeterminerBeforeDet,      // half the sample
  PredeterminerBeforeArticle,  // such a design
  ListMarkerGuard,             // "(i)" is a list marker, not the pronoun
  AcronymGuard,                // "US" the country, not the pronoun
};

inline std::string_view to_string(AmbiguityRule r) {
  switch (r) {
    case AmbiguityRule::ThatContext: return "that_context";
    case AmbiguityRule::WhContext: return "wh_context";
    case AmbiguityRule::AlwaysPronoun: return "always_pronoun";
    case AmbiguityRule::AlwaysDeterminer: return "always_determiner";
    case AmbiguityRule::Correlative: return "correlative";
    case AmbiguityRule::PredeterminerBeforeDet: return "predeterminer_before_det";
    case AmbiguityRule::PredeterminerBeforeArticle: return "predeterminer_before_article";
    case AmbiguityRule::ListMarkerGuard: return "list_marker_guard";
    case AmbiguityRule::AcronymGuard: return "acronym_guard";
  }
  return "?";
}

inline AmbiguityRule parse_ambiguity_rule(std::string_view s) {
  static constexpr std::array kRules = {
      AmbiguityRule::ThatContext,       AmbiguityRule::WhContext,
      AmbiguityRule::AlwaysPronoun,     AmbiguityRule::AlwaysDeterminer,
      AmbiguityRule::Correlative,       AmbiguityRule::PredeterminerBeforeDet,
      AmbiguityRule::PredeterminerBeforeArticle, AmbiguityRule::ListMarkerGuard,
      AmbiguityRule::AcronymGuard};
  for (auto r : kRules)
    if (to_string(r) == s) return r;
  throw DataError("unknown ambiguity rule '" + std::string(s) + "'");
}

// Closed-class word lists behind the feature tagger. Immutable once loaded;
// every lookup takes an already lowercased word.
struct Lexicon {
  using WordSet = std::unordered_set<std::string>;

  WordSet pronouns;
  WordSet determiners;
  WordSet predeterminers;
  WordSet irregular_past;       // VBD and VBN forms, tagged unconditionally
  WordSet past_after_auxiliary;  // base-identical participles ("set"), tagged after have/be
  WordSet number_words;
  std::map<std::string, AmbiguityRule, std::less<>> ambiguous;

  // Context classes used only by the disambiguation rules.
  WordSet auxiliaries;
  WordSet prepositions;
  WordSet function_words;
  WordSet reporting;
  WordSet verbs;
  WordSet ed_exceptions;

  bool is_pronoun(const std::string& w) const { return pronouns.contains(w); }
  bool is_determiner(const std::string& w) const {
    return determiners.contains(w) || predeterminers.contains(w);
  }
  bool is_past_form(const std::string& w) const {
    return irregular_past.contains(w) || past_after_auxiliary.contains(w);
  }
  bool is_number_word(const std::string& w) const { return number_words.contains(w); }
  const AmbiguityRule* ambiguity(const std::string& w) const {
    auto it = ambiguous.find(w);
    return it == ambiguous.end() ? nullptr : &it->second;
  }

  // Parses "word<TAB>class" lines; '#' starts a comment, blank lines ignored.
  static Lexicon parse(std::string_view text, std::string_view origin = "<lexicon>") {
    Lexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') fail("CR line ending");
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) fail("expected word<TAB>class");
      std::string word = line.substr(0, tab);
      const std::string cls = line.substr(tab + 1);
      if (word.empty()) fail("empty word");
      if (std::any_of(word.begin(), word.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
        fail("entry '" + word + "' is not lowercase");

      if (cls == "pronoun") lex.pronouns.insert(word);
      else if (cls == "determiner") lex.determiners.insert(word);
      else if (cls == "predeterminer") lex.predeterminers.insert(word);
      else if (cls == "past") lex.irregular_past.insert(word);
      else if (cls == "past_after_aux") lex.past_after_auxiliary.insert(word);
      else if (cls == "number") lex.number_words.insert(word);
      else if (cls.starts_with("ambiguous:")) lex.ambiguous[word] = parse_ambiguity_rule(cls.substr(10));
      else if (cls == "auxiliary") lex.auxiliaries.insert(word);
      else if (cls == "preposition") lex.prepositions.insert(word);
      else if (cls == "function") lex.function_words.insert(word);
      else if (cls == "reporting") lex.reporting.insert(word);
      else if (cls == "verb") lex.verbs.insert(word);
      else if (cls == "ed_exception") lex.ed_exceptions.insert(word);
      else fail("unknown class '" + cls + "'");
    }
    lex.check_disjoint(origin);
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read lexicon " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
  }

  // The lexicon shipped in data/lexicon.tsv, compiled in.
  static const Lexicon& builtin() {
    static const Lexicon lex = parse(builtin::lexicon_tsv, "data/lexicon.tsv");
    return lex;
  }

 private:
  void check_disjoint(std::string_view origin) const {
    const std::array<std::pair<std::string_view, const WordSet*>, 6> sets = {{
        {"pronoun", &pronouns},
        {"determiner", &determiners},
        {"predeterminer", &predeterminers},
        {"past", &irregular_past},
        {"past_after_aux", &past_after_auxiliary},
        {"number", &number_words},
    }};
    for (std::size_t a = 0; a < sets.size(); ++a) {
      for (const auto& w : *sets[a].second) {
        if (ambiguous.contains(w))
          throw DataError(std::string(origin) + ": '" + w + "' is both " +
                          std::string(sets[a].first) + " and ambiguous");
        for (std::size_t b = a + 1; b < sets.size(); ++b)
          if (sets[b].second->contains(w))
            throw DataError(std::string(origin) + ": '" + w + "' is in both " +
                            std::string(sets[a].first) + " and " + std::string(sets[b].first));
      }
    }
  }
};

}  // namespace stylo
