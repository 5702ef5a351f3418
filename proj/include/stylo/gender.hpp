#pragma once

// Name-based gender assignment with a probability cutoff, an append-only
// lookup cache, pluggable providers and propagation across documents that
// share an author key.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "stylo/builtin_data.hpp"
#include "stylo/corpus.hpp"
#include "stylo/error.hpp"
#include "stylo/io.hpp"
#include "stylo/parallel.hpp"
#include "stylo/person.hpp"
#include "stylo/tokenizer.hpp"

namespace stylo {

enum class GenderSource { ExternalApi, LocalLexicon, Propagated, CutoffRejected, NotQueried, Precoded };

inline std::string_view to_string(GenderSource s) {
  switch (s) {
    case GenderSource::ExternalApi: return "EXTERNAL_API";
    case GenderSource::LocalLexicon: return "LOCAL_LEXICON";
    case GenderSource::Propagated: return "PROPAGATED";
    case GenderSource::CutoffRejected: return "CUTOFF_REJECTED";
    case GenderSource::NotQueried: return "NOT_QUERIED";
    case GenderSource::Precoded: return "PRECODED";
  }
  return "?";
}

inline std::optional<GenderSource> parse_gender_source(std::string_view s) {
  for (auto v : {GenderSource::ExternalApi, GenderSource::LocalLexicon, GenderSource::Propagated,
                 GenderSource::CutoffRejected, GenderSource::NotQueried, GenderSource::Precoded})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct GenderAssignment {
  std::string name_key;
  Gender gender = Gender::Unknown;
  double probability = 0.0;
  GenderSource source = GenderSource::NotQueried;
  bool transient_failure = false;  // provider unreachable; safe to retry later
  std::string donor_key;           // set for PROPAGATED assignments

  friend bool operator==(const GenderAssignment&, const GenderAssignment&) = default;
};

namespace detail {

inline std::string unicode_lower(std::string_view s) {
  if (is_all_ascii(s)) return ascii_lower(s);
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())))
      .toLower(icu::Locale::getRoot())
      .toUTF8String(out);
  return out;
}

// A name part that carries no lookup information: "J", "J.", "J.-P.".
// Every letter run between dots/hyphens has length one.
inline bool is_initial(std::string_view part) {
  std::size_t run = 0;
  for (const auto& cp : decode(part)) {
    if (cp.value == '.' || cp.value == '-') {
      run = 0;
    } else if (!is_word_char(cp.value) || ++run > 1) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Normalized first+middle name used as the lookup and cache key: NFC,
// lowercase, initials dropped, parts joined by single spaces. Empty when the
// name consists of initials only.
inline std::string name_key(const PersonName& name) {
  std::string key;
  for (const std::string* field : {&name.first, &name.middle}) {
    const std::string norm = detail::unicode_lower(detail::normalize_text(*field));
    std::string part;
    auto flush = [&] {
      while (!part.empty() && (part.back() == '.' || part.back() == ',' || part.back() == '-')) part.pop_back();
      if (!part.empty() && !detail::is_initial(part)) {
        if (!key.empty()) key.push_back(' ');
        key += part;
      }
      part.clear();
    };
    for (char c : norm) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') {
        flush();
      } else {
        part.push_back(c);
      }
    }
    flush();
  }
  return key;
}

inline bool is_initials_only(const PersonName& name) { return name_key(name).empty(); }

// ---------------------------------------------------------------- providers

enum class LookupStatus { Ok, Transient };

struct LookupResult {
  LookupStatus status = LookupStatus::Ok;
  Gender gender = Gender::Unknown;  // Unknown with probability 0 when the provider has no data
  double probability = 0.0;
  std::string error;
};

class GenderProvider {
 public:
  virtual ~GenderProvider() = default;
  virtual GenderSource source() const = 0;
  virtual LookupResult lookup(const std::string& name_key) = 0;
};

// Offline table of first names: "name<TAB>F|M<TAB>probability".
class LexiconProvider final : public GenderProvider {
 public:
  static LexiconProvider parse(std::string_view text, std::string_view origin = "<names>") {
    LexiconProvider p;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
      auto fail = [&](const std::string& why) {
        throw DataError(std::string(origin) + ":" + std::to_string(line_no) + ": " + why);
      };
      if (t2 == std::string_view::npos) fail("expected name<TAB>gender<TAB>probability");
      const std::string name = detail::unicode_lower(line.substr(0, t1));
      const auto g = parse_gender(line.substr(t1 + 1, t2 - t1 - 1));
      const auto prob = parse_double(line.substr(t2 + 1));
      if (!g || *g == Gender::Unknown) fail("gender must be F or M");
      if (!prob || *prob < 0.0 || *prob > 1.0) fail("probability must be in [0,1]");
      if (!p.table_.emplace(name, LookupResult{LookupStatus::Ok, *g, *prob, {}}).second) fail("duplicate name " + name);
    }
    return p;
  }

  static LexiconProvider load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

  static LexiconProvider builtin() { return parse(builtin::names_tsv, "builtin names"); }

  GenderSource source() const override { return GenderSource::LocalLexicon; }

  // Exact key first, then the first name part alone.
  LookupResult lookup(const std::string& key) override {
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    if (auto sp = key.find(' '); sp != std::string::npos)
      if (auto it = table_.find(key.substr(0, sp)); it != table_.end()) return it->second;
    return {};
  }

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, LookupResult, std::less<>> table_;
};

// ---------------------------------------------------------------- cache

struct CacheEntry {
  std::string name_key;
  Gender gender = Gender::Unknown;
  double probability = 0.0;
  GenderSource source = GenderSource::ExternalApi;

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

// Append-only file of raw provider responses, one per line:
// name_key<TAB>gender<TAB>probability<TAB>source. Later lines win on load.
// The cutoff is applied when an entry is used, never when it is stored.
class GenderCache {
 public:
  GenderCache() = default;

  explicit GenderCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    const std::string text = read_file(path_);
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
      pos = nl == std::string::npos ? text.size() : nl + 1;
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string_view> f;
      std::size_t start = 0;
      for (;;) {
        const auto tab = line.find('\t', start);
        f.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
      }
      auto g = f.size() == 4 ? parse_gender(f[1]) : std::nullopt;
      auto p = f.size() == 4 ? parse_double(f[2]) : std::nullopt;
      auto s = f.size() == 4 ? parse_gender_source(f[3]) : std::nullopt;
      if (!g || !p || !s || f[0].empty())
        throw DataError(path_.string() + ":" + std::to_string(line_no) + ": malformed cache line");
      entries_[std::string(f[0])] = CacheEntry{std::string(f[0]), *g, *p, *s};
    }
  }

  std::optional<CacheEntry> find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    return std::nullopt;
  }

  void append(const CacheEntry& e) {
    std::lock_guard lock(mutex_);
    entries_[e.name_key] = e;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot write cache " + path_.string());
    out << format_line(e);
    if (!out) throw IoError("error writing cache " + path_.string());
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  static std::string format_line(const CacheEntry& e) {
    return e.name_key + '\t' + std::string(to_string(e.gender)) + '\t' + format_double(e.probability) + '\t' +
           std::string(to_string(e.source)) + '\n';
  }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, CacheEntry> entries_;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------- assign

inline GenderAssignment apply_cutoff(const std::string& key, Gender gender, double probability, GenderSource source,
                                     double cutoff) {
  GenderAssignment a{key, Gender::Unknown, probability, source, false, {}};
  if (gender == Gender::Unknown) return a;
  if (probability >= cutoff) {
    a.gender = gender;
  } else {
    a.source = GenderSource::CutoffRejected;
  }
  return a;
}

struct AssignOptions {
  double cutoff = 0.9;
  bool refresh = false;       // ignore cached entries and query again
  unsigned max_concurrent = 4;  // bound on simultaneous provider lookups
};

inline void check_cutoff(double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw SpecError("cutoff must be in (0, 1]");
}

// Single-name assignment: initials-only names never reach the provider; the
// cache is consulted before the provider and updated after a successful lookup.
inline GenderAssignment assign(const PersonName& name, GenderProvider& provider, GenderCache* cache = nullptr,
                               const AssignOptions& opt = {}) {
  check_cutoff(opt.cutoff);
  const std::string key = name_key(name);
  if (key.empty()) return GenderAssignment{key, Gender::Unknown, 0.0, GenderSource::NotQueried, false, {}};
  if (cache && !opt.refresh)
    if (auto hit = cache->find(key)) return apply_cutoff(key, hit->gender, hit->probability, hit->source, opt.cutoff);
  const LookupResult r = provider.lookup(key);
  if (r.status == LookupStatus::Transient)
    return GenderAssignment{key, Gender::Unknown, 0.0, provider.source(), true, {}};
  if (cache) cache->append({key, r.gender, r.probability, provider.source()});
  return apply_cutoff(key, r.gender, r.probability, provider.source(), opt.cutoff);
}

inline GenderAssignment assign(const PersonName& name, double cutoff, GenderProvider& provider,
                               GenderCache* cache = nullptr) {
  AssignOptions opt;
  opt.cutoff = cutoff;
  return assign(name, provider, cache, opt);
}

// Batch form: unique keys are looked up concurrently (bounded by
// max_concurrent); cache lines are appended in key order once all lookups
// finish, so the cache file does not depend on scheduling.
inline std::vector<GenderAssignment> assign_all(std::span<const PersonName> names, GenderProvider& provider,
                                                GenderCache* cache = nullptr, const AssignOptions& opt = {}) {
  check_cutoff(opt.cutoff);
  std::vector<std::string> keys(names.size());
  std::set<std::string> pending;
  for (std::size_t i = 0; i < names.size(); ++i) {
    keys[i] = name_key(names[i]);
    if (keys[i].empty()) continue;
    if (!cache || opt.refresh || !cache->find(keys[i])) pending.insert(keys[i]);
  }
  const std::vector<std::string> todo(pending.begin(), pending.end());
  std::vector<LookupResult> fetched(todo.size());
  parallel_for(todo.size(), std::max(1u, opt.max_concurrent), [&](std::size_t i) { fetched[i] = provider.lookup(todo[i]); },
               1);
  std::map<std::string, GenderAssignment> resolved;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    const auto& r = fetched[i];
    if (r.status == LookupStatus::Transient) {
      resolved[todo[i]] = GenderAssignment{todo[i], Gender::Unknown, 0.0, provider.source(), true, {}};
      continue;
    }
    if (cache) cache->append({todo[i], r.gender, r.probability, provider.source()});
    resolved[todo[i]] = apply_cutoff(todo[i], r.gender, r.probability, provider.source(), opt.cutoff);
  }
  std::vector<GenderAssignment> out;
  out.reserve(names.size());
  for (const auto& key : keys) {
    if (key.empty()) {
      out.push_back({key, Gender::Unknown, 0.0, GenderSource::NotQueried, false, {}});
    } else if (auto it = resolved.find(key); it != resolved.end()) {
      out.push_back(it->second);
    } else {
      const auto hit = cache->find(key);
      out.push_back(apply_cutoff(key, hit->gender, hit->probability, hit->source, opt.cutoff));
    }
  }
  return out;
}

// ---------------------------------------------------------------- propagate

struct PropagationItem {
  std::string author_key;
  GenderAssignment assignment;
};

struct PropagationResult {
  std::vector<GenderAssignment> assignments;  // same order as the input
  std::vector<std::string> conflicting_groups;  // sorted author keys
  std::size_t propagated = 0;
};

// Within each author-key group, initials-only entries inherit the gender of
// the group's full-name assignments when those agree. Groups whose full-name
// genders disagree are left untouched and reported.
inline PropagationResult propagate(std::span<const PropagationItem> items) {
  PropagationResult out;
  out.assignments.reserve(items.size());
  for (const auto& it : items) out.assignments.push_back(it.assignment);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) groups[items[i].author_key].push_back(i);
  for (const auto& [key, members] : groups) {
    const GenderAssignment* donor = nullptr;
    bool conflict = false;
    for (std::size_t i : members) {
      const auto& a = items[i].assignment;
      if (a.name_key.empty() || a.gender == Gender::Unknown || a.source == GenderSource::Propagated) continue;
      if (!donor || a.name_key < donor->name_key) {
        if (donor && donor->gender != a.gender) conflict = true;
        donor = &a;
      } else if (donor->gender != a.gender) {
        conflict = true;
      }
    }
    if (conflict) {
      out.conflicting_groups.push_back(key);
      continue;
    }
    if (!donor) continue;
    for (std::size_t i : members) {
      auto& a = out.assignments[i];
      if (!a.name_key.empty() || a.gender != Gender::Unknown) continue;
      a.gender = donor->gender;
      a.probability = donor->probability;
      a.source = GenderSource::Propagated;
      a.donor_key = donor->name_key;
      a.transient_failure = false;
      ++out.propagated;
    }
  }
  return out;
}

// ---------------------------------------------------------------- corpus-level

struct CorpusGenderReport {
  struct Row {
    std::string doc_id;
    std::string role;  // "author" or "lawyer"
    std::size_t position = 0;
    std::string author_key;
    GenderAssignment assignment;
  };
  std::vector<Row> rows;
  std::vector<std::string> conflicting_groups;
  std::size_t transient_failures = 0;
};

struct CorpusGenderOptions {
  AssignOptions assign;
  bool trust_precoded = true;  // keep F/M author genders supplied in the input
};

// Resolves author and lawyer genders in place. Pre-coded author genders are
// kept when trusted; lawyers always go through assign. Propagation runs over
// authors across the whole corpus.
inline CorpusGenderReport resolve_corpus_genders(std::vector<Document>& docs, GenderProvider& provider,
                                                 GenderCache* cache = nullptr, const CorpusGenderOptions& opt = {}) {
  CorpusGenderReport report;
  std::vector<PersonName> names;
  struct Slot {
    std::size_t doc, pos;
    bool lawyer, precoded;
  };
  std::vector<Slot> slots;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t k = 0; k < docs[d].authors.size(); ++k) {
      const auto& g = docs[d].authors[k].gender;
      const bool pre = opt.trust_precoded && g.has_value() && *g != Gender::Unknown;
      slots.push_back({d, k, false, pre});
      names.push_back(docs[d].authors[k].name);
    }
    for (std::size_t k = 0; k < docs[d].lawyers.size(); ++k) {
      slots.push_back({d, k, true, false});
      names.push_back(docs[d].lawyers[k].name);
    }
  }
  std::vector<PersonName> to_query;
  std::vector<std::size_t> query_slot;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (!slots[i].precoded) {
      to_query.push_back(names[i]);
      query_slot.push_back(i);
    }
  const auto assigned = assign_all(to_query, provider, cache, opt.assign);
  std::vector<GenderAssignment> result(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].precoded) {
      const auto g = *docs[slots[i].doc].authors[slots[i].pos].gender;
      result[i] = {name_key(names[i]), g, 1.0, GenderSource::Precoded, false, {}};
    }
  for (std::size_t q = 0; q < query_slot.size(); ++q) result[query_slot[q]] = assigned[q];

  std::vector<PropagationItem> items;
  std::vector<std::size_t> item_slot;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].lawyer) continue;
    items.push_back({author_key(docs[slots[i].doc].authors[slots[i].pos]), result[i]});
    item_slot.push_back(i);
  }
  auto prop = propagate(items);
  for (std::size_t k = 0; k < item_slot.size(); ++k) result[item_slot[k]] = prop.assignments[k];
  report.conflicting_groups = std::move(prop.conflicting_groups);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& doc = docs[slots[i].doc];
    Author& person = slots[i].lawyer ? doc.lawyers[slots[i].pos] : doc.authors[slots[i].pos];
    person.gender = result[i].gender;
    if (result[i].transient_failure) ++report.transient_failures;
    report.rows.push_back({doc.id, slots[i].lawyer ? "lawyer" : "author", slots[i].pos, author_key(person), result[i]});
  }
  return report;
}

inline std::string assignments_csv(const CorpusGenderReport& r) {
  std::string out = csv::join({"doc_id", "role", "position", "author_key", "name_key", "gender", "probability", "source",
                               "transient_failure", "donor_key"});
  for (const auto& row : r.rows) {
    const auto& a = row.assignment;
    out += csv::join({row.doc_id, row.role, std::to_string(row.position), row.author_key, a.name_key,
                      std::string(to_string(a.gender)), format_double(a.probability), std::string(to_string(a.source)),
                      a.transient_failure ? "1" : "0", a.donor_key});
  }
  return out;
}

}  // namespace stylo
