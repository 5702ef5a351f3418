#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fixture_io.hpp"
#include "stylo/io.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/synth.hpp"
#include "stylo/table.hpp"

namespace stylo {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stylo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  // Runs the installed binary so exit codes are observed as a shell would.
  static int spawn(const std::string& args) {
    const std::string cmd = std::string(STYLO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const { return read_file(path(name)); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string doc_line(const std::string& id, const std::string& text, const std::string& gender,
                     const std::string& field = "econ", int year = 2000) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["kind"] = "PAPER";
  j["text"] = text;
  j["field"] = field;
  j["year"] = year;
  j["authors"] = {{{"first", "Alex"}, {"last", "Doe" + id}, {"gender", gender}}};
  j["language"] = "en";
  return j.dump() + "\n";
}

TEST_F(Cli, AnalyzeOrdersTheFixtureAbstracts) {
  write_file(path("abstracts.jsonl"), doc_line("a1", test::read_fixture("abstract1.txt"), "F") +
                                          doc_line("a2", test::read_fixture("abstract2.txt"), "M"));
  ASSERT_EQ(run({"analyze", "--input", path("abstracts.jsonl").string(), "--output", path("out").string()}), 0)
      << err_.str();
  const Table t = Table::load(path("out/scores.csv"));
  ASSERT_EQ(t.rows(), 2u);
  const auto ratio = t.numeric("ratio");
  EXPECT_GT(ratio[0], ratio[1]);
  EXPECT_GE(std::stoi(t.cell(1, "n_num")), 8);
  EXPECT_EQ(t.cell(0, "n_q"), "4");
  EXPECT_EQ(t.cell(0, "status"), "KEPT");
}

TEST_F(Cli, EmptyCorpusGivesEmptyOutput) {
  write_file(path("empty.jsonl"), "");
  ASSERT_EQ(run({"analyze", "--input", path("empty.jsonl").string(), "--output", path("out").string()}), 0);
  EXPECT_EQ(read("out/scores.csv"), scores_csv({}));
}

TEST_F(Cli, SyntheticScoresMatchTruth) {
  ASSERT_EQ(run({"synth", "--output", path("syn").string(), "--n-docs", "1500", "--seed", "4"}), 0) << err_.str();
  ASSERT_EQ(run({"analyze", "--input", path("syn/corpus.jsonl").string(), "--output", path("an").string(),
                 "--threads", "3"}),
            0);
  const auto truth = parse_truth_jsonl(read("syn/truth.jsonl"));
  const Table t = Table::load(path("an/scores.csv"));
  ASSERT_EQ(t.rows(), truth.size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    ASSERT_EQ(t.cell(r, "id"), truth[r].id);
    ASSERT_EQ(t.cell(r, "n_pron"), std::to_string(truth[r].counts.n_pron));
    ASSERT_EQ(t.cell(r, "n_and"), std::to_string(truth[r].counts.n_and));
    ASSERT_EQ(t.cell(r, "n_q"), std::to_string(truth[r].counts.n_q));
    ASSERT_EQ(t.cell(r, "n_det"), std::to_string(truth[r].counts.n_det));
    ASSERT_EQ(t.cell(r, "n_past"), std::to_string(truth[r].counts.n_past));
    ASSERT_EQ(t.cell(r, "n_num"), std::to_string(truth[r].counts.n_num));
    ASSERT_EQ(t.cell(r, "n_tokens"), std::to_string(truth[r].counts.n_tokens));
  }
}

TEST_F(Cli, UnreadableInputExitsOne) {
  EXPECT_EQ(run({"analyze", "--input", path("missing.jsonl").string(), "--output", path("out").string()}), 1);
  EXPECT_EQ(spawn("analyze --input " + path("missing.jsonl").string() + " --output " + path("out").string()), 1);
}

TEST_F(Cli, BadFlagsExitTwo) {
  EXPECT_EQ(spawn("analyze --no-such-flag"), 2);
  EXPECT_EQ(spawn("frobnicate"), 2);
  EXPECT_EQ(spawn("analyze --output " + path("out").string()), 2);  // --input missing
  EXPECT_EQ(spawn("--help"), 0);
}

TEST_F(Cli, MatchThreeFemalesFiveMales) {
  std::string corpus;
  for (int i = 0; i < 3; ++i) corpus += doc_line("f" + std::to_string(i), test::read_fixture("abstract1.txt"), "F");
  for (int i = 0; i < 5; ++i) corpus += doc_line("m" + std::to_string(i), test::read_fixture("abstract2.txt"), "M");
  corpus += doc_line("lonely", test::read_fixture("abstract1.txt"), "F", "physics");
  write_file(path("c.jsonl"), corpus);
  ASSERT_EQ(run({"analyze", "--input", path("c.jsonl").string(), "--output", path("an").string()}), 0);
  ASSERT_EQ(run({"match", "--input", path("an/scores.csv").string(), "--output", path("m1").string(), "--seed", "42",
                 "--threads", "1"}),
            0);
  ASSERT_EQ(run({"match", "--input", path("an/scores.csv").string(), "--output", path("m8").string(), "--seed", "42",
                 "--threads", "8"}),
            0);
  const Table pairs = Table::load(path("m1/pairs.csv"));
  EXPECT_EQ(pairs.rows(), 3u);
  EXPECT_EQ(read("m1/pairs.csv"), read("m8/pairs.csv"));
  EXPECT_EQ(read("m1/unmatched.csv"), "female_id\nlonely\n");
}

TEST_F(Cli, RegressExactFitAndErrors) {
  Table t;
  std::vector<double> x, y, dup;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(1.0 + 2.0 * i);
  }
  t.add_column("id", {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"});
  t.add_numeric("x", x);
  t.add_numeric("y", y);
  t.add_numeric("x_again", x);
  write_file(path("t.csv"), t.to_csv());
  ASSERT_EQ(run({"regress", "--input", path("t.csv").string(), "--formula", "y ~ x", "--output", path("r").string()}),
            0)
      << err_.str();
  const Table coef = Table::load(path("r/coefficients.csv"));
  EXPECT_NEAR(coef.numeric("estimate")[0], 1.0, 1e-10);
  EXPECT_NEAR(coef.numeric("estimate")[1], 2.0, 1e-10);
  const auto model = nlohmann::json::parse(read("r/model.json"));
  EXPECT_EQ(model["se_type"], "HC1");

  EXPECT_EQ(run({"regress", "--input", path("t.csv").string(), "--formula", "y ~ x + x_again", "--output",
                 path("r2").string()}),
            2);
  EXPECT_NE(err_.str().find("x_again"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"regress", "--input", path("t.csv").string(), "--output", path("r3").string()}), 2);
  EXPECT_EQ(run({"regress", "--input", path("t.csv").string(), "--formula", "y ~ x", "--legend", "t9", "--output",
                 path("r4").string()}),
            2);
}

TEST_F(Cli, SpecFileAndLegend) {
  Table t;
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i % 2);
    y.push_back(0.30 + 0.02 * (i % 2) + 0.001 * ((i * 7) % 5));
  }
  t.add_column("id", std::vector<std::string>(30, "k"));
  t.add_numeric("female", x);
  t.add_numeric("ratio", y);
  write_file(path("t.csv"), t.to_csv());
  write_file(path("model.spec"), "outcome = ratio\npredictors = female\nrobust = false\n");
  ASSERT_EQ(run({"regress", "--input", path("t.csv").string(), "--spec", path("model.spec").string(), "--legend", "t6",
                 "--focal", "female", "--output", path("r").string()}),
            0)
      << err_.str();
  const auto model = nlohmann::json::parse(read("r/model.json"));
  EXPECT_EQ(model["se_type"], "classical");
  EXPECT_EQ(model["legend"], "***p<0.01; **p<0.05; *p<0.1");
  EXPECT_TRUE(model.contains("margins"));
}

TEST_F(Cli, CiteWritesProfiles) {
  write_file(path("c.jsonl"),
             R"({"id":"d1","kind":"PAPER","text":"x","field":"f","year":2000,"authors":[{"first":"A","last":"B","id":"ab"}],)"
             R"("cited_by":[{"id":"c1","first_author_gender":"F"},{"id":"c2","first_author_gender":"M","citing_author_ids":["ab"]},)"
             R"({"id":"c3","first_author_gender":"F"},{"id":"c4"}]})"
             "\n");
  ASSERT_EQ(run({"cite", "--input", path("c.jsonl").string(), "--output", path("o").string()}), 0) << err_.str();
  const Table t = Table::load(path("o/citations.csv"));
  EXPECT_EQ(t.cell(0, "total_cites"), "3");
  EXPECT_NEAR(t.numeric("rate_female_first")[0], 200.0 / 3.0, 1e-12);
  EXPECT_EQ(t.cell(0, "imputed_zero"), "0");
}

TEST_F(Cli, ReportBinsAndNothingToPlot) {
  write_file(path("s.csv"), "id,gender,ratio,kind\na,F,0.05,PAPER\nb,M,0.15,PAPER\n");
  ASSERT_EQ(run({"report", "--input", path("s.csv").string(), "--output", path("r").string()}), 0) << err_.str();
  EXPECT_EQ(read("r/histogram.csv"), "bin_lo,bin_hi,n_female,n_male,pct_female,pct_male\n0,0.1,1,0,100,0\n0.1,0.2,0,1,0,100\n");
  EXPECT_EQ(read("r/histogram.svg").rfind("<svg", 0), 0u);

  write_file(path("u.csv"), "id,gender,ratio,kind\na,F,,PAPER\n");
  EXPECT_EQ(run({"report", "--input", path("u.csv").string(), "--output", path("u").string()}), 2);
  EXPECT_NE(err_.str().find("nothing to plot"), std::string::npos);
  write_file(path("e.csv"), "id,gender,ratio,kind\n");
  EXPECT_EQ(run({"report", "--input", path("e.csv").string(), "--output", path("e").string()}), 2);

  write_file(path("p.csv"), "id,gender,ratio,kind\na,F,0.05,PATENT\nb,M,0.07,PATENT\n");
  ASSERT_EQ(run({"report", "--input", path("p.csv").string(), "--output", path("p").string()}), 0);
  EXPECT_NE(read("p/histogram.csv").find("0.05,0.1,1,1,100,100"), std::string::npos);
}

TEST_F(Cli, ConfigFileSuppliesUnsetFlags) {
  write_file(path("s.csv"), "id,gender,ratio,kind\na,F,0.05,PAPER\nb,M,0.15,PAPER\n");
  write_file(path("stylo.conf"), "# defaults\n[report]\nbin_width = 0.2\n[synth]\nn-docs = 3\n");
  ASSERT_EQ(run({"--config", path("stylo.conf").string(), "report", "--input", path("s.csv").string(), "--output",
                 path("r").string()}),
            0)
      << err_.str();
  EXPECT_EQ(Table::load(path("r/histogram.csv")).rows(), 1u);
  ASSERT_EQ(run({"--config", path("stylo.conf").string(), "report", "--input", path("s.csv").string(), "--output",
                 path("r2").string(), "--bin-width", "0.05"}),
            0);
  EXPECT_EQ(Table::load(path("r2/histogram.csv")).rows(), 4u);

  write_file(path("bad.conf"), "colour = blue\n");
  EXPECT_EQ(run({"--config", path("bad.conf").string(), "report", "--input", path("s.csv").string(), "--output",
                 path("r3").string()}),
            2);
}

TEST_F(Cli, ConfigFileAppliesFlags) {
  write_file(path("c.jsonl"), doc_line("a1", test::read_fixture("abstract1.txt"), "F") +
                                  R"({"id":"team","kind":"PAPER","text":"t","field":"f","year":2000,"authors":[{"first":"A","last":"B"},{"first":"C","last":"D"}]})"
                                  "\n");
  write_file(path("a.conf"), "solo-only = true\nmin-words = 0\n");
  ASSERT_EQ(run({"--config", path("a.conf").string(), "analyze", "--input", path("c.jsonl").string(), "--output",
                 path("o").string()}),
            0)
      << err_.str();
  EXPECT_NE(read("o/funnel.csv").find("dropped_TEAM,1"), std::string::npos) << read("o/funnel.csv");
}

TEST_F(Cli, ManifestVerifiesAndDetectsChanges) {
  ASSERT_EQ(run({"synth", "--output", path("syn").string(), "--n-docs", "50"}), 0);
  ASSERT_EQ(run({"analyze", "--input", path("syn/corpus.jsonl").string(), "--output", path("an").string()}), 0);
  EXPECT_EQ(run({"verify-manifest", path("an/manifest.json").string()}), 0) << out_.str();
  const auto manifest = nlohmann::json::parse(read("an/manifest.json"));
  EXPECT_EQ(manifest["policies"]["denominator"], "all-tokens");
  EXPECT_EQ(manifest.dump().find("time"), std::string::npos);
  write_file(path("an/scores.csv"), read("an/scores.csv") + "tampered\n");
  EXPECT_EQ(run({"verify-manifest", path("an/manifest.json").string()}), 1);
  EXPECT_NE(out_.str().find("CHANGED output scores.csv"), std::string::npos) << out_.str();
  fs::remove(path("syn/corpus.jsonl"));
  EXPECT_EQ(run({"verify-manifest", path("an/manifest.json").string()}), 1);
  EXPECT_NE(out_.str().find("MISSING input"), std::string::npos);
}

TEST_F(Cli, EndToEndDeterministicAcrossThreadCounts) {
  ASSERT_EQ(run({"synth", "--output", path("syn").string(), "--n-docs", "1200", "--effect-beta", "0.02"}), 0);
  const std::string corpus = path("syn/corpus.jsonl").string();
  for (const std::string threads : {"1", "4"}) {
    const std::string base = path("t" + threads).string();
    ASSERT_EQ(run({"analyze", "--input", corpus, "--output", base + "/an", "--threads", threads}), 0);
    ASSERT_EQ(run({"match", "--input", path("t1/an/scores.csv").string(), "--output", base + "/ma", "--seed", "42",
                   "--threads", threads}),
              0);
    ASSERT_EQ(run({"regress", "--input", path("t1/an/scores.csv").string(), "--pairs",
                   path("t1/ma/pairs.csv").string(), "--formula", "ratio ~ female | field + year", "--output",
                   base + "/re", "--threads", threads}),
              0)
        << err_.str();
  }
  for (const std::string f : {"an/scores.csv", "an/manifest.json", "ma/pairs.csv", "ma/manifest.json",
                              "re/coefficients.csv", "re/model.json", "re/manifest.json"})
    EXPECT_EQ(read("t1/" + f), read("t4/" + f)) << f;
}

TEST_F(Cli, GenderWithLexiconAndCache) {
  write_file(path("c.jsonl"),
             R"({"id":"d1","kind":"PAPER","text":"x","field":"f","year":2000,"authors":[{"first":"Maria","last":"Rossi"}]})"
             "\n"
             R"({"id":"d2","kind":"PAPER","text":"x","field":"f","year":2000,"authors":[{"first":"M.","last":"Rossi"}]})"
             "\n");
  write_file(path("names.tsv"), "maria\tF\t0.98\n");
  ASSERT_EQ(run({"gender", "--input", path("c.jsonl").string(), "--output", path("g").string(), "--names",
                 path("names.tsv").string(), "--cache", path("cache.tsv").string()}),
            0)
      << err_.str();
  const Table a = Table::load(path("g/assignments.csv"));
  ASSERT_EQ(a.rows(), 2u);
  EXPECT_EQ(a.cell(0, "gender"), "F");
  EXPECT_EQ(a.cell(0, "source"), "LOCAL_LEXICON");
  EXPECT_EQ(a.cell(1, "source"), "PROPAGATED");
  EXPECT_TRUE(fs::exists(path("cache.tsv")));
  EXPECT_NE(read("g/corpus.jsonl").find("\"gender\":\"F\""), std::string::npos);
  EXPECT_EQ(run({"gender", "--input", path("c.jsonl").string(), "--output", path("g2").string(), "--cutoff", "1.5"}), 2);
}

}  // namespace
}  // namespace stylo
