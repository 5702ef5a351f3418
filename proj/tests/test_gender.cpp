#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <thread>

#include "stylo/gender.hpp"
#include "stylo/gender_http.hpp"

namespace stylo {
namespace {

namespace fs = std::filesystem;

class FakeProvider final : public GenderProvider {
 public:
  std::map<std::string, LookupResult> table;
  std::atomic<int> calls{0};
  bool down = false;

  GenderSource source() const override { return GenderSource::ExternalApi; }
  LookupResult lookup(const std::string& key) override {
    ++calls;
    if (down) return {LookupStatus::Transient, Gender::Unknown, 0.0, "down"};
    auto it = table.find(key);
    return it == table.end() ? LookupResult{} : it->second;
  }
  void set(const std::string& key, Gender g, double p) { table[key] = {LookupStatus::Ok, g, p, {}}; }
};

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("stylo_gender_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PersonName nm(std::string first, std::string last = "Smith", std::string middle = "") {
  return {std::move(first), std::move(middle), std::move(last)};
}

TEST(NameKey, Normalization) {
  EXPECT_EQ(name_key(nm("Maria")), "maria");
  EXPECT_EQ(name_key(nm("  MARIA  ")), "maria");
  EXPECT_EQ(name_key(nm("J.")), "");
  EXPECT_EQ(name_key(nm("J.", "Smith", "R.")), "");
  EXPECT_EQ(name_key(nm("J.-P.")), "");
  EXPECT_EQ(name_key(nm("J.", "Smith", "Robert")), "robert");
  EXPECT_EQ(name_key(nm("Mary-Ann", "Lee", "K.")), "mary-ann");
  EXPECT_EQ(name_key(nm("Jean Luc")), "jean luc");
  // Composed and decomposed forms share a key.
  EXPECT_EQ(name_key(nm("Jos\xC3\xA9")), name_key(nm("Jose\xCC\x81")));
  EXPECT_EQ(name_key(nm("\xC3\x89LODIE")), "\xC3\xA9lodie");
}

TEST(Assign, AboveCutoff) {
  FakeProvider p;
  p.set("maria", Gender::Female, 0.98);
  const auto a = assign(nm("Maria"), 0.9, p);
  EXPECT_EQ(a.gender, Gender::Female);
  EXPECT_EQ(a.probability, 0.98);
  EXPECT_EQ(a.source, GenderSource::ExternalApi);
}

TEST(Assign, BelowCutoffIsRejected) {
  FakeProvider p;
  p.set("robin", Gender::Female, 0.62);
  const auto a = assign(nm("Robin"), 0.9, p);
  EXPECT_EQ(a.gender, Gender::Unknown);
  EXPECT_EQ(a.source, GenderSource::CutoffRejected);
}

TEST(Assign, InitialsOnlyNeverQueried) {
  FakeProvider p;
  const auto a = assign(nm("J."), 0.9, p);
  EXPECT_EQ(a.gender, Gender::Unknown);
  EXPECT_EQ(a.source, GenderSource::NotQueried);
  EXPECT_EQ(p.calls, 0);
}

TEST(Assign, UnknownToProvider) {
  FakeProvider p;
  const auto a = assign(nm("Zzyzx"), 0.9, p);
  EXPECT_EQ(a.gender, Gender::Unknown);
  EXPECT_EQ(a.source, GenderSource::ExternalApi);
  EXPECT_FALSE(a.transient_failure);
}

TEST(Assign, CutoffMustBeInUnitInterval) {
  FakeProvider p;
  EXPECT_THROW(assign(nm("Maria"), 0.0, p), SpecError);
  EXPECT_THROW(assign(nm("Maria"), 1.5, p), SpecError);
  EXPECT_NO_THROW(assign(nm("Maria"), 1.0, p));
}

TEST(AssignProperty, CutoffInvariants) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FakeProvider p;
  for (int i = 0; i < 3000; ++i) {
    const std::string key = "name" + std::to_string(i);
    const double prob = i % 10 == 0 ? 1.0 : u(rng);
    p.set(key, i % 2 ? Gender::Female : Gender::Male, prob);
    for (double cutoff : {0.5, 0.9, 1.0}) {
      const auto a = assign(nm(key), cutoff, p);
      if (a.gender != Gender::Unknown) {
        EXPECT_GE(a.probability, cutoff);
      }
      EXPECT_EQ(a.gender != Gender::Unknown, prob >= cutoff);
      if (cutoff == 1.0) {
        EXPECT_EQ(a.gender != Gender::Unknown, prob == 1.0);
      }
    }
  }
}

TEST(Cache, HitIsBitIdenticalAndSkipsProvider) {
  TempDir dir;
  const auto file = dir.path / "cache.tsv";
  FakeProvider p;
  const double odd = 0.1 + 0.2 + 0.6;  // not exactly representable as a short decimal
  p.set("maria", Gender::Female, odd);
  GenderCache cache(file);
  const auto first = assign(nm("Maria"), 0.5, p, &cache);
  EXPECT_EQ(p.calls, 1);
  const auto second = assign(nm("Maria"), 0.5, p, &cache);
  EXPECT_EQ(p.calls, 1);
  EXPECT_EQ(first, second);

  GenderCache reloaded(file);
  const auto third = assign(nm("Maria"), 0.5, p, &reloaded);
  EXPECT_EQ(p.calls, 1);
  EXPECT_EQ(third, first);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(third.probability), std::bit_cast<std::uint64_t>(odd));
  EXPECT_EQ(read_file(file), "maria\tF\t" + format_double(odd) + "\tEXTERNAL_API\n");
}

TEST(Cache, StoresRawResponseAndAppliesCutoffOnRead) {
  FakeProvider p;
  p.set("robin", Gender::Female, 0.62);
  GenderCache cache;
  EXPECT_EQ(assign(nm("Robin"), 0.9, p, &cache).source, GenderSource::CutoffRejected);
  const auto relaxed = assign(nm("Robin"), 0.6, p, &cache);
  EXPECT_EQ(relaxed.gender, Gender::Female);
  EXPECT_EQ(p.calls, 1);
}

TEST(Cache, RefreshForcesRequery) {
  TempDir dir;
  FakeProvider p;
  p.set("maria", Gender::Female, 0.91);
  GenderCache cache(dir.path / "c.tsv");
  assign(nm("Maria"), 0.9, p, &cache);
  p.set("maria", Gender::Female, 0.99);
  AssignOptions opt;
  opt.refresh = true;
  EXPECT_EQ(assign(nm("Maria"), p, &cache, opt).probability, 0.99);
  EXPECT_EQ(p.calls, 2);
  // Append-only: both lines remain, the later one wins on reload.
  GenderCache reloaded(dir.path / "c.tsv");
  EXPECT_EQ(reloaded.find("maria")->probability, 0.99);
  const std::string text = read_file(dir.path / "c.tsv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Cache, MalformedFileIsDataError) {
  TempDir dir;
  write_file(dir.path / "bad.tsv", "maria\tF\tnot-a-number\tEXTERNAL_API\n");
  EXPECT_THROW(GenderCache(dir.path / "bad.tsv"), DataError);
}

TEST(Assign, TransientFailureIsNotCached) {
  FakeProvider p;
  p.set("maria", Gender::Female, 0.98);
  p.down = true;
  GenderCache cache;
  const auto a = assign(nm("Maria"), 0.9, p, &cache);
  EXPECT_EQ(a.gender, Gender::Unknown);
  EXPECT_TRUE(a.transient_failure);
  EXPECT_EQ(cache.size(), 0u);
  p.down = false;
  EXPECT_EQ(assign(nm("Maria"), 0.9, p, &cache).gender, Gender::Female);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(AssignAll, DeduplicatesAndIsScheduleIndependent) {
  const auto lex = LexiconProvider::builtin();
  std::vector<PersonName> names;
  std::mt19937 rng(1);
  const std::vector<std::string> firsts = {"Maria", "John", "Robin", "J.", "Elena", "Zzyzx", "Anna", "James", "Jan"};
  for (int i = 0; i < 400; ++i) names.push_back(nm(firsts[rng() % firsts.size()], "L" + std::to_string(i % 13)));
  TempDir dir;
  std::string first_cache;
  std::vector<GenderAssignment> first;
  for (unsigned conc : {1u, 8u}) {
    auto provider = lex;
    const auto file = dir.path / ("cache" + std::to_string(conc));
    GenderCache cache(file);
    AssignOptions opt;
    opt.max_concurrent = conc;
    const auto out = assign_all(names, provider, &cache, opt);
    ASSERT_EQ(out.size(), names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto single = lex;
      EXPECT_EQ(out[i], assign(names[i], single, nullptr, opt));
    }
    if (first.empty()) {
      first = out;
      first_cache = read_file(file);
    } else {
      EXPECT_EQ(out, first);
      EXPECT_EQ(read_file(file), first_cache);
    }
  }
}

TEST(Lexicon, BuiltinTable) {
  auto lex = LexiconProvider::builtin();
  EXPECT_GT(lex.size(), 50u);
  const auto maria = assign(nm("Maria"), 0.9, lex);
  EXPECT_EQ(maria.gender, Gender::Female);
  EXPECT_EQ(maria.probability, 0.98);
  EXPECT_EQ(maria.source, GenderSource::LocalLexicon);
  EXPECT_EQ(assign(nm("Robin"), 0.9, lex).source, GenderSource::CutoffRejected);
  EXPECT_EQ(assign(nm("John", "Smith", "Paul"), 0.9, lex).gender, Gender::Male);
  EXPECT_THROW(LexiconProvider::parse("maria\tX\t0.9\n"), DataError);
  EXPECT_THROW(LexiconProvider::parse("maria\tF\t1.9\n"), DataError);
  EXPECT_THROW(LexiconProvider::parse("maria F 0.9\n"), DataError);
  EXPECT_THROW(LexiconProvider::parse("maria\tF\t0.9\nmaria\tM\t0.9\n"), DataError);
}

PropagationItem item(std::string author, GenderAssignment a) { return {std::move(author), std::move(a)}; }

GenderAssignment full(std::string key, Gender g, double p = 0.99) {
  return {std::move(key), g, p, GenderSource::ExternalApi, false, {}};
}
GenderAssignment initials() { return {"", Gender::Unknown, 0.0, GenderSource::NotQueried, false, {}}; }

TEST(Propagate, InitialsInheritFromFullName) {
  const std::vector<PropagationItem> items = {item("smith|j", initials()), item("smith|j", full("john", Gender::Male))};
  const auto r = propagate(items);
  EXPECT_EQ(r.assignments[0].gender, Gender::Male);
  EXPECT_EQ(r.assignments[0].source, GenderSource::Propagated);
  EXPECT_EQ(r.assignments[0].donor_key, "john");
  EXPECT_EQ(r.assignments[1], items[1].assignment);
  EXPECT_EQ(r.propagated, 1u);
  EXPECT_TRUE(r.conflicting_groups.empty());
}

TEST(Propagate, ConflictingGroupIsFlaggedAndUnchanged) {
  const std::vector<PropagationItem> items = {item("smith|j", full("jan", Gender::Female)),
                                              item("smith|j", full("john", Gender::Male)), item("smith|j", initials())};
  const auto r = propagate(items);
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(r.assignments[i], items[i].assignment);
  EXPECT_EQ(r.conflicting_groups, std::vector<std::string>{"smith|j"});
}

TEST(Propagate, InitialsOnlyGroupUnchanged) {
  const std::vector<PropagationItem> items = {item("smith|j", initials()), item("smith|j", initials())};
  const auto r = propagate(items);
  EXPECT_EQ(r.assignments[0], items[0].assignment);
  EXPECT_EQ(r.propagated, 0u);
}

TEST(PropagateProperty, NeverFlipsAndDonorsAreDirect) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<PropagationItem> items;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      const std::string author = "a" + std::to_string(rng() % 5);
      switch (rng() % 4) {
        case 0: items.push_back(item(author, initials())); break;
        case 1: items.push_back(item(author, full("x" + std::to_string(rng() % 3), Gender::Female))); break;
        case 2: items.push_back(item(author, full("y" + std::to_string(rng() % 3), Gender::Male))); break;
        default: items.push_back(item(author, full("z", Gender::Unknown, 0.5))); break;
      }
    }
    const auto r = propagate(items);
    std::map<std::string, GenderAssignment> by_key;
    for (const auto& it : items) by_key[it.assignment.name_key] = it.assignment;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& before = items[i].assignment;
      const auto& after = r.assignments[i];
      if (before.gender != Gender::Unknown) {
        EXPECT_EQ(after, before);
      }
      if (after.source == GenderSource::Propagated) {
        EXPECT_TRUE(before.name_key.empty());
        ASSERT_TRUE(by_key.contains(after.donor_key));
        EXPECT_NE(by_key[after.donor_key].source, GenderSource::Propagated);
        EXPECT_EQ(by_key[after.donor_key].gender, after.gender);
      }
    }
  }
}

TEST(ResolveCorpus, PrecodedInventorsLawyersAndPropagation) {
  FakeProvider p;
  p.set("john", Gender::Male, 0.99);
  p.set("lee", Gender::Female, 0.95);
  std::vector<Document> docs(3);
  docs[0].id = "a";
  docs[0].authors = {{nm("J."), {}, {}}};
  docs[1].id = "b";
  docs[1].authors = {{nm("John"), {}, {}}};
  docs[2].id = "c";
  docs[2].kind = DocKind::Patent;
  docs[2].authors = {{nm("Pat", "Doe"), Gender::Female, {}}};
  docs[2].lawyers = {{nm("Lee", "Law"), Gender::Male, {}}};
  GenderCache cache;
  const auto report = resolve_corpus_genders(docs, p, &cache);
  EXPECT_EQ(docs[0].authors[0].gender, Gender::Male);
  EXPECT_EQ(docs[1].authors[0].gender, Gender::Male);
  EXPECT_EQ(docs[2].authors[0].gender, Gender::Female);
  EXPECT_EQ(docs[2].lawyers[0].gender, Gender::Female);  // lawyers always go through assign
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.rows[0].assignment.source, GenderSource::Propagated);
  EXPECT_EQ(report.rows[2].assignment.source, GenderSource::Precoded);
  EXPECT_EQ(p.calls, 2);
  EXPECT_NE(assignments_csv(report).find("PROPAGATED"), std::string::npos);
}

// Minimal genderize-compatible endpoint on the loopback interface.
class LoopbackServer {
 public:
  std::atomic<int> requests{0};
  bool fail = false;

  LoopbackServer() {
    server_.Get("/", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (fail) {
        res.status = 503;
        return;
      }
      const std::string name = req.get_param_value("name");
      if (name == "maria")
        res.set_content(R"({"name":"maria","gender":"female","probability":0.98,"count":100})", "application/json");
      else if (name == "robin")
        res.set_content(R"({"name":"robin","gender":"female","probability":0.62,"count":9})", "application/json");
      else if (name == "garbled")
        res.set_content("<html>", "text/html");
      else
        res.set_content(R"({"name":")" + name + R"(","gender":null,"probability":0.0,"count":0})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LoopbackServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

HttpProviderConfig http_config(std::string url) {
  HttpProviderConfig c;
  c.base_url = std::move(url);
  c.timeout_seconds = 2;
  c.retries = 0;
  return c;
}

TEST(HttpProvider, LookupsAgainstLoopbackServer) {
  LoopbackServer server;
  HttpGenderProvider http(http_config(server.url()));
  GenderCache cache;
  const auto maria = assign(nm("Maria"), 0.9, http, &cache);
  EXPECT_EQ(maria.gender, Gender::Female);
  EXPECT_EQ(maria.probability, 0.98);
  EXPECT_EQ(maria.source, GenderSource::ExternalApi);
  EXPECT_EQ(assign(nm("Robin"), 0.9, http, &cache).source, GenderSource::CutoffRejected);
  EXPECT_EQ(assign(nm("Qwerty"), 0.9, http, &cache).gender, Gender::Unknown);
  EXPECT_EQ(server.requests, 3);
  EXPECT_EQ(assign(nm("Maria"), 0.9, http, &cache), maria);
  EXPECT_EQ(server.requests, 3);

  const auto garbled = assign(nm("Garbled"), 0.9, http, &cache);
  EXPECT_TRUE(garbled.transient_failure);
  EXPECT_FALSE(cache.find("garbled"));
}

TEST(HttpProvider, ServerErrorsAreTransient) {
  LoopbackServer server;
  server.fail = true;
  auto cfg = http_config(server.url());
  cfg.retries = 2;
  cfg.backoff = std::chrono::milliseconds(1);
  HttpGenderProvider http(cfg);
  GenderCache cache;
  const auto a = assign(nm("Maria"), 0.9, http, &cache);
  EXPECT_TRUE(a.transient_failure);
  EXPECT_EQ(a.gender, Gender::Unknown);
  EXPECT_EQ(server.requests, 3);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(HttpProvider, UnreachableEndpointIsTransient) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again: nothing listens on this port
  auto cfg = http_config("http://127.0.0.1:" + std::to_string(port));
  cfg.timeout_seconds = 1;
  HttpGenderProvider http(cfg);
  const auto a = assign(nm("Maria"), 0.9, http);
  EXPECT_TRUE(a.transient_failure);
}

TEST(HttpProvider, ResponseParsing) {
  EXPECT_EQ(HttpGenderProvider::parse_response(R"({"gender":"male","probability":1})").gender, Gender::Male);
  EXPECT_EQ(HttpGenderProvider::parse_response(R"({"gender":null})").status, LookupStatus::Ok);
  EXPECT_EQ(HttpGenderProvider::parse_response(R"({"gender":"male"})").status, LookupStatus::Transient);
  EXPECT_EQ(HttpGenderProvider::parse_response(R"({"gender":"male","probability":3})").status, LookupStatus::Transient);
  EXPECT_EQ(HttpGenderProvider::parse_response("[]").status, LookupStatus::Transient);
}

}  // namespace
}  // namespace stylo
