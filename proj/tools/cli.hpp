#pragma once

// The stylo command-line tool. Each subcommand reads its inputs, writes its
// outputs into --output DIR together with manifest.json, and reports a short
// summary on the given stream.
//
// Exit codes: 0 success, 1 unreadable or malformed input / failed
// verification, 2 invalid flags, configuration or model specification.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stylo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitSpec = 2;

struct AnalyzeOptions {
  std::filesystem::path input, output;
  std::string schema = "auto";  // auto | jsonl | csv
  std::size_t min_words = 100;
  bool solo_only = false;
  bool single_lawyer = false;
  bool paper_defaults = false;  // solo authors, single lawyer, start years
  std::string language = "en";
  unsigned threads = 0;         // 0: all hardware threads
};

struct MatchOptions {
  std::filesystem::path input, output;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct RegressOptions {
  std::filesystem::path input, output;
  std::vector<std::filesystem::path> joins;
  std::string key = "id";
  std::optional<std::filesystem::path> pairs;
  std::optional<std::filesystem::path> spec_file;
  std::string formula;
  std::string legend = "t4";
  std::string by;
  std::string focal;
  bool classical = false;
  unsigned threads = 0;
};

struct CiteOptions {
  std::filesystem::path input, output;
  std::string schema = "auto";
  unsigned threads = 0;
};

struct ReportOptions {
  std::filesystem::path input, output;
  std::optional<std::filesystem::path> pairs;
  std::optional<double> bin_width;
};

struct SynthOptions {
  std::filesystem::path output;
  std::uint64_t seed = 1;
  std::size_t n_docs = 1000;
  std::optional<double> effect_beta;
  std::optional<double> gender_shift;
  double homophily = 0.5;
  double mean_citations = 8.0;
  std::string calibration = "male";  // base rates: male | female
  std::size_t min_tokens = 130, max_tokens = 170;
  unsigned threads = 0;
};

struct GenderOptions {
  std::filesystem::path input, output;
  std::string schema = "auto";
  std::string provider = "lexicon";  // lexicon | http
  std::optional<std::filesystem::path> names;
  std::string endpoint = "https://api.genderize.io";
  std::string api_key;
  std::optional<std::filesystem::path> cache;
  double cutoff = 0.9;
  bool refresh = false;
  bool requery_precoded = false;
  unsigned max_concurrent = 4;
  int timeout = 10;
  int retries = 1;
};

void cmd_analyze(const AnalyzeOptions& opt, std::ostream& out);
void cmd_match(const MatchOptions& opt, std::ostream& out);
void cmd_regress(const RegressOptions& opt, std::ostream& out);
void cmd_cite(const CiteOptions& opt, std::ostream& out);
void cmd_report(const ReportOptions& opt, std::ostream& out);
void cmd_synth(const SynthOptions& opt, std::ostream& out);
void cmd_gender(const GenderOptions& opt, std::ostream& out);
// Returns true when every recorded digest matches.
bool cmd_verify_manifest(const std::filesystem::path& manifest, std::ostream& out);

// Parses arguments (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stylo::cli
