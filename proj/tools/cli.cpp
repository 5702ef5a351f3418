#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "stylo/citation.hpp"
#include "stylo/corpus.hpp"
#include "stylo/gender.hpp"
#include "stylo/manifest.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/report.hpp"
#include "stylo/stats.hpp"
#include "stylo/synth.hpp"
// Last: <resolv.h> (via httplib) defines a `_res` macro that breaks Eigen.
#include "stylo/gender_http.hpp"

#ifndef STYLO_VERSION
#define STYLO_VERSION "0.0.0"
#endif

namespace stylo::cli {
namespace {

// Collects outputs of one command; everything lands in one directory next to
// the manifest describing it.
class OutputDir {
 public:
  OutputDir(const std::filesystem::path& dir, std::string command) : dir_(dir) {
    if (dir.empty()) throw SpecError("--output is required");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    manifest.command = std::move(command);
    manifest.tool_version = STYLO_VERSION;
  }

  void write(const std::string& name, const std::string& contents) {
    write_file(dir_ / name, contents);
    manifest.add_output(name, contents);
  }

  void finish() { write_file(dir_ / "manifest.json", manifest_text(manifest)); }

  RunManifest manifest;

 private:
  std::filesystem::path dir_;
};

void require_input(const std::filesystem::path& p) {
  if (p.empty()) throw SpecError("--input is required");
}

Schema resolve_schema(const std::string& schema, const std::filesystem::path& input) {
  if (schema == "auto") return schema_for_path(input);
  const auto s = parse_schema(schema);
  if (!s) throw SpecError("unknown schema '" + schema + "' (expected auto, jsonl or csv)");
  return *s;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

// Reads the corpus, reporting malformed records without stopping.
IngestResult read_corpus(const std::filesystem::path& input, const std::string& schema, unsigned threads,
                         std::ostream& out) {
  auto r = ingest(input, resolve_schema(schema, input), resolve_threads(threads));
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  if (!r.rejects.empty()) out << "rejected " << r.rejects.size() << " record(s); see rejects.csv\n";
  return r;
}

std::set<std::string, std::less<>> matched_ids(const std::filesystem::path& pairs) {
  const Table t = Table::load(pairs);
  std::set<std::string, std::less<>> ids;
  for (const auto& v : t.column("female_id")) ids.insert(v);
  for (const auto& v : t.column("male_id")) ids.insert(v);
  return ids;
}

Table restrict_to(const Table& t, const std::string& key, const std::set<std::string, std::less<>>& ids) {
  std::vector<std::size_t> rows;
  const auto& col = t.column(key);
  for (std::size_t r = 0; r < col.size(); ++r)
    if (ids.contains(col[r])) rows.push_back(r);
  return t.select_rows(rows);
}

}  // namespace

// ---------------------------------------------------------------- commands

void cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  require_input(opt.input);
  FilterPolicy policy = opt.paper_defaults ? paper_default_policy() : FilterPolicy{};
  policy.min_words = opt.min_words;
  policy.solo_only = policy.solo_only || opt.solo_only;
  policy.require_single_lawyer = policy.require_single_lawyer || opt.single_lawyer;
  policy.language = opt.language;
  OutputDir dir(opt.output, "analyze");
  const auto corpus = read_corpus(opt.input, opt.schema, opt.threads, out);
  const auto result = analyze_corpus(corpus.documents, policy, resolve_threads(opt.threads));

  std::string funnel = funnel_csv(result.filter, corpus.documents.size());
  funnel += csv::join({"undefined_ratio", std::to_string(result.n_undefined)});

  auto& m = dir.manifest;
  m.add_input(opt.input);
  m.options = {{"schema", opt.schema},
               {"min_words", std::to_string(policy.min_words)},
               {"solo_only", bool_str(policy.solo_only)},
               {"single_lawyer", bool_str(policy.require_single_lawyer)},
               {"paper_defaults", bool_str(opt.paper_defaults)},
               {"language", policy.language}};
  m.policies = {{"denominator", std::string(kDenominatorPolicy)}};
  dir.write("scores.csv", scores_csv(result.rows));
  dir.write("funnel.csv", funnel);
  dir.write("rejects.csv", rejects_csv(corpus.rejects));
  dir.finish();
  out << "analyzed " << corpus.documents.size() << " document(s): kept " << result.rows.size() << ", dropped "
      << result.filter.dropped.size() << ", undefined ratio " << result.n_undefined << "\n";
}

void cmd_match(const MatchOptions& opt, std::ostream& out) {
  require_input(opt.input);
  OutputDir dir(opt.output, "match");
  const Table scores = Table::load(opt.input);
  // Documents with an undefined ratio cannot enter the outcome regressions.
  std::vector<std::size_t> usable;
  const bool has_status = scores.has("status");
  for (std::size_t r = 0; r < scores.rows(); ++r)
    if (!has_status || scores.cell(r, "status") == kStatusKept) usable.push_back(r);
  const auto candidates = candidates_from_scores(scores.select_rows(usable));
  const auto result = match_sample(std::span<const MatchCandidate>(candidates), opt.seed, resolve_threads(opt.threads));

  std::string unmatched = csv::join({"female_id"});
  for (const auto& id : result.unmatched_female) unmatched += csv::join({id});
  auto& m = dir.manifest;
  m.add_input(opt.input);
  m.seed = opt.seed;
  m.policies = {{"matching", std::string(kMatchPolicy)}};
  dir.write("pairs.csv", pairs_csv(result.pairs));
  dir.write("unmatched.csv", unmatched);
  dir.finish();
  out << "matched " << result.pairs.size() << " pair(s); unmatched female " << result.unmatched_female.size()
      << ", unused male " << result.unused_male << ", unknown gender " << result.excluded_unknown << "\n";
}

void cmd_regress(const RegressOptions& opt, std::ostream& out) {
  require_input(opt.input);
  if (opt.spec_file && !opt.formula.empty()) throw SpecError("give --spec or --formula, not both");
  if (!opt.spec_file && opt.formula.empty()) throw SpecError("--spec or --formula is required");
  const auto legend = parse_legend(opt.legend);
  if (!legend) throw SpecError("unknown legend '" + opt.legend + "' (expected t4 or t6)");
  ModelSpec spec = opt.spec_file ? parse_spec_text(read_file(*opt.spec_file)) : parse_formula(opt.formula);
  if (opt.classical) spec.robust = false;

  OutputDir dir(opt.output, "regress");
  auto& m = dir.manifest;
  Table data = Table::load(opt.input);
  m.add_input(opt.input);
  if (!data.has(opt.key)) throw SpecError("key column '" + opt.key + "' missing from " + opt.input.string());
  for (const auto& j : opt.joins) {
    Table other = Table::load(j);
    m.add_input(j);
    if (!other.has(opt.key)) {
      if (other.has("doc_id"))
        other.rename_column("doc_id", opt.key);
      else
        throw SpecError("key column '" + opt.key + "' missing from " + j.string());
    }
    data = data.join(other, opt.key);
  }
  if (opt.pairs) {
    data = restrict_to(data, opt.key, matched_ids(*opt.pairs));
    m.add_input(*opt.pairs);
  }
  if (opt.spec_file) m.add_input(*opt.spec_file);
  m.options = {{"formula", to_formula(spec)}, {"legend", opt.legend}, {"key", opt.key}, {"by", opt.by},
               {"focal", opt.focal}};
  m.policies = {{"robust_se", spec.robust ? "HC1" : "classical"},
                {"reference_level", "alphabetically-first"},
                {"missing_values", "listwise-deletion"}};

  if (!opt.by.empty()) {
    const auto fits = fit_by_group(data, spec, opt.by, resolve_threads(opt.threads));
    std::string table = csv::join({"group", "term", "estimate", "std_error", "t", "p_value", "stars", "vif", "n", "error"});
    auto models = nlohmann::ordered_json::array();
    std::size_t ok = 0;
    for (const auto& g : fits) {
      if (!g.result) {
        table += csv::join({g.level, "", "", "", "", "", "", "", "", g.error});
        models.push_back({{"group", g.level}, {"error", g.error}});
        continue;
      }
      ++ok;
      const auto& r = *g.result;
      for (const auto& c : r.coefficients) {
        const auto it = r.vifs.find(c.name);
        table += csv::join({g.level, c.name, format_double(c.estimate), format_double(c.std_error), format_double(c.t),
                            format_double(c.p_value), stars(c.p_value, *legend),
                            it == r.vifs.end() ? "" : format_double(it->second), std::to_string(r.n), ""});
      }
      auto j = to_json(r, *legend);
      j["group"] = g.level;
      models.push_back(std::move(j));
    }
    if (ok == 0) throw SpecError("no group could be fitted");
    dir.write("coefficients.csv", table);
    dir.write("model.json", models.dump(2) + "\n");
    dir.finish();
    out << "fitted " << ok << " of " << fits.size() << " group(s) by " << opt.by << "\n";
    return;
  }

  const auto r = fit_ols(data, spec);
  std::optional<Margins> mg;
  if (!opt.focal.empty()) mg = margins(r, opt.focal);
  dir.write("coefficients.csv", coefficients_csv(r, *legend));
  dir.write("model.json", to_json(r, *legend, mg).dump(2) + "\n");
  dir.write("coefficients.svg", coefficient_svg(r));
  dir.finish();
  out << "n=" << r.n << " k=" << r.k << " R2=" << format_fixed(r.r_squared, 4) << " (" << r.se_type << ")";
  if (r.n_dropped_missing) out << ", dropped " << r.n_dropped_missing << " row(s) with missing values";
  out << "\n";
  if (mg) {
    out << "margins " << mg->focal << ": " << format_double(mg->pred_0) << " -> " << format_double(mg->pred_1);
    if (mg->pct_diff)
      out << " (" << format_fixed(*mg->pct_diff, 2) << "%)\n";
    else
      out << " (percentage undefined: zero baseline)\n";
  }
}

void cmd_cite(const CiteOptions& opt, std::ostream& out) {
  require_input(opt.input);
  OutputDir dir(opt.output, "cite");
  const auto corpus = read_corpus(opt.input, opt.schema, opt.threads, out);
  const auto profiles = decompose_all(corpus.documents, resolve_threads(opt.threads));
  auto& m = dir.manifest;
  m.add_input(opt.input);
  m.options = {{"schema", opt.schema}};
  m.policies = {{"citation_denominator", std::string(kCitationDenominatorPolicy)}, {"self_citations", "excluded"}};
  dir.write("citations.csv", citation_csv(profiles));
  dir.write("rejects.csv", rejects_csv(corpus.rejects));
  dir.finish();
  const auto imputed = std::count_if(profiles.begin(), profiles.end(), [](const auto& p) { return p.imputed_zero; });
  out << "profiled " << profiles.size() << " document(s); " << imputed << " imputed zero\n";
}

void cmd_report(const ReportOptions& opt, std::ostream& out) {
  require_input(opt.input);
  OutputDir dir(opt.output, "report");
  auto& m = dir.manifest;
  Table scores = Table::load(opt.input);
  m.add_input(opt.input);
  if (opt.pairs) {
    scores = restrict_to(scores, "id", matched_ids(*opt.pairs));
    m.add_input(*opt.pairs);
  }
  const auto& gender = scores.column("gender");
  const auto ratio = scores.numeric("ratio");
  std::vector<RatioObservation> obs;
  bool all_patents = scores.rows() > 0 && scores.has("kind");
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    obs.push_back({parse_gender(gender[r]).value_or(Gender::Unknown),
                   std::isnan(ratio[r]) ? std::nullopt : std::optional<double>(ratio[r])});
    if (all_patents && scores.cell(r, "kind") != "PATENT") all_patents = false;
  }
  const double width = opt.bin_width.value_or(all_patents ? kPatentBinWidth : kPaperBinWidth);
  const auto h = ratio_histogram(obs, width);
  m.options = {{"bin_width", format_double(width)}};
  dir.write("histogram.csv", histogram_csv(h));
  dir.write("histogram.svg", histogram_svg(h));
  dir.finish();
  out << "binned " << h.total_female << " female and " << h.total_male << " male document(s) into " << h.bins.size()
      << " bin(s) of width " << format_double(width) << "\n";
}

void cmd_synth(const SynthOptions& opt, std::ostream& out) {
  GeneratorConfig cfg;
  cfg.n_docs = opt.n_docs;
  cfg.seed = opt.seed;
  cfg.effect_beta = opt.effect_beta;
  cfg.gender_shift = opt.gender_shift;
  cfg.homophily = opt.homophily;
  cfg.mean_citations = opt.mean_citations;
  cfg.min_tokens = opt.min_tokens;
  cfg.max_tokens = opt.max_tokens;
  if (opt.calibration == "male")
    cfg.base_rates = male_paper_rates();
  else if (opt.calibration == "female")
    cfg.base_rates = female_paper_rates();
  else
    throw SpecError("unknown calibration '" + opt.calibration + "' (expected male or female)");
  const auto truth = resolve_truth(cfg);  // validate before touching the output directory
  OutputDir dir(opt.output, "synth");
  const auto corpus = generate(cfg, resolve_threads(opt.threads));
  auto& m = dir.manifest;
  m.seed = opt.seed;
  m.options = {{"n_docs", std::to_string(opt.n_docs)},
               {"effect_beta", opt.effect_beta ? format_double(*opt.effect_beta) : ""},
               {"gender_shift", opt.gender_shift ? format_double(*opt.gender_shift) : ""},
               {"homophily", format_double(opt.homophily)},
               {"mean_citations", format_double(opt.mean_citations)},
               {"calibration", opt.calibration},
               {"min_tokens", std::to_string(opt.min_tokens)},
               {"max_tokens", std::to_string(opt.max_tokens)}};
  dir.write("corpus.jsonl", export_jsonl(corpus.documents));
  dir.write("truth.jsonl", truth_jsonl(corpus.truth));
  dir.write("truth.json", to_json(truth).dump(2) + "\n");
  dir.finish();
  out << "generated " << corpus.documents.size() << " document(s); expected ratio female "
      << format_fixed(truth.expected_ratio_female, 4) << ", male " << format_fixed(truth.expected_ratio_male, 4)
      << ", beta " << format_fixed(truth.beta, 4) << "\n";
}

void cmd_gender(const GenderOptions& opt, std::ostream& out) {
  require_input(opt.input);
  check_cutoff(opt.cutoff);
  std::unique_ptr<GenderProvider> provider;
  if (opt.provider == "lexicon") {
    provider = std::make_unique<LexiconProvider>(opt.names ? LexiconProvider::load(*opt.names)
                                                           : LexiconProvider::builtin());
  } else if (opt.provider == "http") {
    HttpProviderConfig hc;
    hc.base_url = opt.endpoint;
    hc.api_key = opt.api_key;
    hc.timeout_seconds = opt.timeout;
    hc.retries = opt.retries;
    provider = std::make_unique<HttpGenderProvider>(hc);
  } else {
    throw SpecError("unknown provider '" + opt.provider + "' (expected lexicon or http)");
  }
  OutputDir dir(opt.output, "gender");
  auto corpus = read_corpus(opt.input, opt.schema, 1, out);
  std::optional<GenderCache> cache;
  if (opt.cache) cache.emplace(*opt.cache);
  CorpusGenderOptions go;
  go.assign.cutoff = opt.cutoff;
  go.assign.refresh = opt.refresh;
  go.assign.max_concurrent = std::max(1u, opt.max_concurrent);
  go.trust_precoded = !opt.requery_precoded;
  const auto report = resolve_corpus_genders(corpus.documents, *provider, cache ? &*cache : nullptr, go);

  auto& m = dir.manifest;
  m.add_input(opt.input);
  if (opt.names) m.add_input(*opt.names);
  m.options = {{"provider", opt.provider},
               {"endpoint", opt.provider == "http" ? opt.endpoint : ""},
               {"cutoff", format_double(opt.cutoff)},
               {"refresh", bool_str(opt.refresh)},
               {"requery_precoded", bool_str(opt.requery_precoded)},
               {"cache", opt.cache ? opt.cache->generic_string() : ""}};
  dir.write("assignments.csv", assignments_csv(report));
  dir.write("corpus.jsonl", export_jsonl(corpus.documents));
  dir.write("rejects.csv", rejects_csv(corpus.rejects));
  dir.finish();
  out << "assigned " << report.rows.size() << " name(s); " << report.transient_failures << " transient failure(s), "
      << report.conflicting_groups.size() << " conflicting group(s)\n";
}

bool cmd_verify_manifest(const std::filesystem::path& manifest, std::ostream& out) {
  const auto checks = verify_manifest(manifest);
  bool ok = true;
  for (const auto& c : checks) {
    out << (c.ok() ? "OK      " : (c.actual.empty() ? "MISSING " : "CHANGED ")) << c.role << " " << c.path << "\n";
    ok = ok && c.ok();
  }
  return ok;
}

// ---------------------------------------------------------------- parsing

namespace {

struct ConfigEntry {
  std::string section, key, value;
  std::size_t line = 0;
};

// key = value lines; '#' or ';' starts a comment; [name] limits the following
// keys to one subcommand.
std::vector<ConfigEntry> read_config(const std::filesystem::path& path) {
  std::vector<ConfigEntry> out;
  std::istringstream in(read_file(path));
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SpecError(path.string() + ":" + std::to_string(line_no) + ": bad section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SpecError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.push_back({section, std::move(key), std::move(value), line_no});
  }
  return out;
}

// Options absent from the command line take their value from the config file.
void apply_config(const std::filesystem::path& path, CLI::App& app, CLI::App& sub) {
  for (const auto& e : read_config(path)) {
    if (!e.section.empty() && e.section != sub.get_name()) continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + e.key);
    if (!opt) {
      bool known = false;
      for (const auto* other : app.get_subcommands({}))
        known = known || other->get_option_no_throw("--" + e.key) != nullptr;
      if (!known) throw SpecError(path.string() + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
      continue;
    }
    if (opt->count() > 0) continue;  // flags win
    opt->add_result(e.value);
    opt->run_callback();
  }
}

template <typename T>
void optional_value(CLI::App* sub, const std::string& name, std::optional<T>& target, const std::string& help) {
  sub->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Involved/informational style analysis of abstracts, matched sampling, citation profiles and "
               "fixed-effects regressions.",
               "stylo"};
  app.set_version_flag("--version", std::string(STYLO_VERSION));
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "key = value file supplying defaults for unset flags");

  auto threads = [](CLI::App* s, unsigned& t) {
    s->add_option("--threads", t, "worker threads (0: all cores)")->capture_default_str();
  };

  AnalyzeOptions an;
  auto* s_an = app.add_subcommand("analyze", "score every kept document");
  s_an->add_option("--input", an.input, "corpus (.jsonl or .csv)");
  s_an->add_option("--output", an.output, "output directory");
  s_an->add_option("--schema", an.schema, "auto, jsonl or csv")->capture_default_str();
  s_an->add_option("--min-words", an.min_words, "keep documents with more words than this")->capture_default_str();
  s_an->add_flag("--solo-only", an.solo_only, "drop multi-author documents");
  s_an->add_flag("--single-lawyer", an.single_lawyer, "drop patents without exactly one lawyer");
  s_an->add_flag("--paper-defaults", an.paper_defaults, "solo authors, single lawyer and start years");
  s_an->add_option("--language", an.language, "declared language to keep")->capture_default_str();
  threads(s_an, an.threads);

  MatchOptions ma;
  auto* s_ma = app.add_subcommand("match", "pair female and male documents within field and year");
  s_ma->add_option("--input", ma.input, "scores.csv from analyze");
  s_ma->add_option("--output", ma.output, "output directory");
  s_ma->add_option("--seed", ma.seed, "matching seed")->capture_default_str();
  threads(s_ma, ma.threads);

  RegressOptions re;
  std::string spec_path, pairs_path;
  auto* s_re = app.add_subcommand("regress", "fit an OLS model with fixed effects");
  s_re->add_option("--input", re.input, "table (CSV)");
  s_re->add_option("--output", re.output, "output directory");
  s_re->add_option("--join", re.joins, "further tables joined on the key column");
  s_re->add_option("--key", re.key, "join key")->capture_default_str();
  s_re->add_option("--pairs", pairs_path, "restrict to documents in this pairs.csv");
  s_re->add_option("--spec", spec_path, "model specification file");
  s_re->add_option("--formula", re.formula, "model formula, e.g. 'ratio ~ female | field + year'");
  s_re->add_option("--legend", re.legend, "significance legend: t4 or t6")->capture_default_str();
  s_re->add_option("--by", re.by, "fit one model per level of this column");
  s_re->add_option("--focal", re.focal, "binary predictor for predicted margins");
  s_re->add_flag("--classical", re.classical, "classical instead of HC1 standard errors");
  threads(s_re, re.threads);

  CiteOptions ci;
  auto* s_ci = app.add_subcommand("cite", "citation rates by citing-author gender");
  s_ci->add_option("--input", ci.input, "corpus (.jsonl or .csv)");
  s_ci->add_option("--output", ci.output, "output directory");
  s_ci->add_option("--schema", ci.schema, "auto, jsonl or csv")->capture_default_str();
  threads(s_ci, ci.threads);

  ReportOptions rp;
  std::string rp_pairs;
  auto* s_rp = app.add_subcommand("report", "ratio histogram by gender (SVG and CSV)");
  s_rp->add_option("--input", rp.input, "scores.csv from analyze");
  s_rp->add_option("--output", rp.output, "output directory");
  s_rp->add_option("--pairs", rp_pairs, "restrict to documents in this pairs.csv");
  optional_value(s_rp, "--bin-width", rp.bin_width, "bin width (default 0.1; 0.05 for patents)");

  SynthOptions sy;
  auto* s_sy = app.add_subcommand("synth", "generate a synthetic corpus with known truth");
  s_sy->add_option("--output", sy.output, "output directory");
  s_sy->add_option("--seed", sy.seed, "generator seed")->capture_default_str();
  s_sy->add_option("--n-docs", sy.n_docs, "number of documents")->capture_default_str();
  optional_value(s_sy, "--effect-beta", sy.effect_beta, "target ratio difference, female minus male");
  optional_value(s_sy, "--gender-shift", sy.gender_shift, "additive shift on female involved probability");
  s_sy->add_option("--homophily", sy.homophily, "probability a citer shares the cited gender")->capture_default_str();
  s_sy->add_option("--mean-citations", sy.mean_citations, "mean citations per document")->capture_default_str();
  s_sy->add_option("--calibration", sy.calibration, "base rates: male or female means")->capture_default_str();
  s_sy->add_option("--min-tokens", sy.min_tokens, "shortest document")->capture_default_str();
  s_sy->add_option("--max-tokens", sy.max_tokens, "longest document")->capture_default_str();
  threads(s_sy, sy.threads);

  GenderOptions ge;
  std::string names_path, cache_path;
  auto* s_ge = app.add_subcommand("gender", "assign author and lawyer genders from first names");
  s_ge->add_option("--input", ge.input, "corpus (.jsonl or .csv)");
  s_ge->add_option("--output", ge.output, "output directory");
  s_ge->add_option("--schema", ge.schema, "auto, jsonl or csv")->capture_default_str();
  s_ge->add_option("--provider", ge.provider, "lexicon or http")->capture_default_str();
  s_ge->add_option("--names", names_path, "name lexicon TSV (name, gender, probability)");
  s_ge->add_option("--endpoint", ge.endpoint, "genderize-compatible base URL")->capture_default_str();
  s_ge->add_option("--api-key", ge.api_key, "service API key");
  s_ge->add_option("--cache", cache_path, "persistent lookup cache");
  s_ge->add_option("--cutoff", ge.cutoff, "minimum probability to accept a gender")->capture_default_str();
  s_ge->add_flag("--refresh", ge.refresh, "query again even when cached");
  s_ge->add_flag("--requery-precoded", ge.requery_precoded, "ignore genders given in the input");
  s_ge->add_option("--max-concurrent", ge.max_concurrent, "simultaneous lookups")->capture_default_str();
  s_ge->add_option("--timeout", ge.timeout, "HTTP timeout in seconds")->capture_default_str();
  s_ge->add_option("--retries", ge.retries, "extra attempts after a transient failure")->capture_default_str();

  std::string manifest_path;
  auto* s_vm = app.add_subcommand("verify-manifest", "recompute and check every digest in a manifest");
  s_vm->add_option("manifest,--input", manifest_path, "manifest.json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSpec;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) apply_config(config, app, *sub);
    if (!spec_path.empty()) re.spec_file = spec_path;
    if (!pairs_path.empty()) re.pairs = pairs_path;
    if (!rp_pairs.empty()) rp.pairs = rp_pairs;
    if (!names_path.empty()) ge.names = names_path;
    if (!cache_path.empty()) ge.cache = cache_path;

    if (sub == s_an) cmd_analyze(an, out);
    else if (sub == s_ma) cmd_match(ma, out);
    else if (sub == s_re) cmd_regress(re, out);
    else if (sub == s_ci) cmd_cite(ci, out);
    else if (sub == s_rp) cmd_report(rp, out);
    else if (sub == s_sy) cmd_synth(sy, out);
    else if (sub == s_ge) cmd_gender(ge, out);
    else if (sub == s_vm) {
      if (manifest_path.empty()) throw SpecError("manifest path is required");
      if (!cmd_verify_manifest(manifest_path, out)) {
        err << "error: manifest verification failed\n";
        return kExitIo;
      }
    }
    return kExitOk;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace stylo::cli
