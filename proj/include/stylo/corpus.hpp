#pragma once

// Document collections: JSONL/CSV ingest with reject reporting, export,
// filtering with a reason funnel, and seeded female/male matching within
// (field, year) strata.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stylo/error.hpp"
#include "stylo/io.hpp"
#include "stylo/parallel.hpp"
#include "stylo/person.hpp"
#include "stylo/random.hpp"
#include "stylo/tokenizer.hpp"

namespace stylo {

enum class DocKind { Paper, Patent };

inline std::string_view to_string(DocKind k) { return k == DocKind::Paper ? "PAPER" : "PATENT"; }

inline std::optional<DocKind> parse_doc_kind(std::string_view s) {
  const std::string v = detail::ascii_lower(s);
  if (v == "paper") return DocKind::Paper;
  if (v == "patent") return DocKind::Patent;
  return std::nullopt;
}

struct Author {
  PersonName name;
  std::optional<Gender> gender;  // pre-coded gender, when the source provides one
  std::string id;                // explicit author id; empty when absent

  friend bool operator==(const Author&, const Author&) = default;
};

struct CitingRecord {
  std::string citing_doc_id;
  Gender first_author_gender = Gender::Unknown;
  Gender last_author_gender = Gender::Unknown;
  std::vector<std::string> citing_author_ids;

  friend bool operator==(const CitingRecord&, const CitingRecord&) = default;
};

struct Document {
  std::string id;
  DocKind kind = DocKind::Paper;
  std::string text;
  std::string field;
  int year = 0;
  std::vector<Author> authors;
  std::vector<Author> lawyers;  // "lawyer" may be an object or an array in JSONL
  std::optional<std::string> language;
  std::vector<CitingRecord> cited_by;

  friend bool operator==(const Document&, const Document&) = default;
};

// Identity used for self-citation checks and gender propagation: the explicit
// id when present, otherwise "last|first-initial" in lowercase.
inline std::string author_key(const Author& a) {
  if (!a.id.empty()) return a.id;
  auto letters = [](std::string_view s) {
    std::string out;
    for (char c : s)
      if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  };
  const std::string first = letters(a.name.first);
  std::string initial;
  if (!first.empty()) {
    std::size_t len = 1;
    const auto lead = static_cast<unsigned char>(first[0]);
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    initial = first.substr(0, std::min(len, first.size()));
  }
  return letters(a.name.last) + "|" + initial;
}

// Gender of the document's first author, or Unknown.
inline Gender author_gender(const Document& d) {
  if (d.authors.empty() || !d.authors.front().gender) return Gender::Unknown;
  return *d.authors.front().gender;
}

// ---------------------------------------------------------------- ingest

enum class Schema { Jsonl, Csv };

inline std::optional<Schema> parse_schema(std::string_view s) {
  const std::string v = detail::ascii_lower(s);
  if (v == "jsonl" || v == "json") return Schema::Jsonl;
  if (v == "csv") return Schema::Csv;
  return std::nullopt;
}

inline Schema schema_for_path(const std::filesystem::path& p) {
  return detail::ascii_lower(p.extension().string()) == ".csv" ? Schema::Csv : Schema::Jsonl;
}

struct Reject {
  std::size_t line = 0;
  std::string id;  // empty when the record has no readable id
  std::string reason;

  friend bool operator==(const Reject&, const Reject&) = default;
};

struct IngestResult {
  std::vector<Document> documents;
  std::vector<Reject> rejects;
  std::vector<std::string> warnings;
};

namespace detail {

using nlohmann::json;

struct RecordError {
  std::string reason;
};

inline const json* member(const json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline std::string require_string(const json& obj, std::string_view key, bool allow_empty = false) {
  const json* v = member(obj, key);
  if (!v) throw RecordError{"missing " + std::string(key)};
  if (!v->is_string()) throw RecordError{"invalid " + std::string(key)};
  auto s = v->get<std::string>();
  if (!allow_empty && s.empty()) throw RecordError{"missing " + std::string(key)};
  return s;
}

inline std::string optional_string(const json& obj, std::string_view key) {
  const json* v = member(obj, key);
  if (!v) return {};
  if (!v->is_string()) throw RecordError{"invalid " + std::string(key)};
  return v->get<std::string>();
}

inline Gender gender_field(const json& obj, std::string_view key) {
  const json* v = member(obj, key);
  if (!v) return Gender::Unknown;
  if (!v->is_string()) throw RecordError{"invalid " + std::string(key)};
  auto g = parse_gender(v->get_ref<const std::string&>());
  if (!g) throw RecordError{"invalid " + std::string(key)};
  return *g;
}

inline Author parse_author(const json& obj, std::string_view what) {
  if (!obj.is_object()) throw RecordError{"invalid " + std::string(what)};
  Author a;
  a.name.first = optional_string(obj, "first");
  a.name.middle = optional_string(obj, "middle");
  a.name.last = optional_string(obj, "last");
  if (a.name.last.empty() && a.name.first.empty()) throw RecordError{"invalid " + std::string(what) + " name"};
  if (const json* g = member(obj, "gender")) {
    if (!g->is_string() || !parse_gender(g->get_ref<const std::string&>()))
      throw RecordError{"invalid " + std::string(what) + " gender"};
    a.gender = parse_gender(g->get_ref<const std::string&>());
  }
  if (const json* id = member(obj, "id")) {
    if (!id->is_string()) throw RecordError{"invalid " + std::string(what) + " id"};
    a.id = id->get<std::string>();
  }
  return a;
}

inline const std::set<std::string, std::less<>>& known_document_keys() {
  static const std::set<std::string, std::less<>> keys = {"id",    "kind",    "text",     "field",   "year",
                                                          "authors", "lawyer", "language", "cited_by"};
  return keys;
}

struct ParsedRecord {
  std::variant<Document, RecordError> value;
  std::string id;
  std::vector<std::string> unknown_keys;
};

inline ParsedRecord parse_json_record(std::string_view line) {
  ParsedRecord out{RecordError{}, {}, {}};
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error&) {
    out.value = RecordError{"malformed JSON"};
    return out;
  }
  if (!obj.is_object()) {
    out.value = RecordError{"record is not an object"};
    return out;
  }
  if (const json* id = member(obj, "id"); id && id->is_string()) out.id = id->get<std::string>();
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known_document_keys().contains(it.key())) out.unknown_keys.push_back(it.key());
  try {
    Document d;
    d.id = require_string(obj, "id");
    auto kind = parse_doc_kind(require_string(obj, "kind"));
    if (!kind) throw RecordError{"invalid kind"};
    d.kind = *kind;
    d.text = require_string(obj, "text", true);
    d.field = require_string(obj, "field");
    const json* year = member(obj, "year");
    if (!year) throw RecordError{"missing year"};
    if (!year->is_number_integer()) throw RecordError{"invalid year"};
    d.year = year->get<int>();
    const json* authors = member(obj, "authors");
    if (!authors) throw RecordError{"missing authors"};
    if (!authors->is_array()) throw RecordError{"invalid authors"};
    for (const auto& a : *authors) d.authors.push_back(parse_author(a, "author"));
    if (const json* lawyer = member(obj, "lawyer")) {
      if (lawyer->is_array()) {
        for (const auto& l : *lawyer) d.lawyers.push_back(parse_author(l, "lawyer"));
      } else {
        d.lawyers.push_back(parse_author(*lawyer, "lawyer"));
      }
    }
    if (const json* lang = member(obj, "language")) {
      if (!lang->is_string()) throw RecordError{"invalid language"};
      d.language = lang->get<std::string>();
    }
    if (const json* cites = member(obj, "cited_by")) {
      if (!cites->is_array()) throw RecordError{"invalid cited_by"};
      for (const auto& c : *cites) {
        if (!c.is_object()) throw RecordError{"invalid cited_by entry"};
        CitingRecord r;
        r.citing_doc_id = require_string(c, "id");
        r.first_author_gender = gender_field(c, "first_author_gender");
        r.last_author_gender = gender_field(c, "last_author_gender");
        if (const json* ids = member(c, "citing_author_ids")) {
          if (!ids->is_array()) throw RecordError{"invalid citing_author_ids"};
          for (const auto& x : *ids) {
            if (!x.is_string()) throw RecordError{"invalid citing_author_ids"};
            r.citing_author_ids.push_back(x.get<std::string>());
          }
        }
        d.cited_by.push_back(std::move(r));
      }
    }
    out.value = std::move(d);
  } catch (const RecordError& e) {
    out.value = e;
  } catch (const json::exception&) {
    out.value = RecordError{"invalid value"};
  }
  return out;
}

// Applies duplicate-id detection and collects rejects in input order.
inline void collect(IngestResult& result, std::vector<ParsedRecord>& parsed, const std::vector<std::size_t>& lines) {
  std::unordered_set<std::string> seen;
  std::set<std::string> unknown;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    auto& p = parsed[i];
    for (auto& k : p.unknown_keys) unknown.insert(k);
    if (auto* err = std::get_if<RecordError>(&p.value)) {
      result.rejects.push_back({lines[i], p.id, err->reason});
      continue;
    }
    auto& doc = std::get<Document>(p.value);
    if (!seen.insert(doc.id).second) {
      result.rejects.push_back({lines[i], doc.id, "duplicate id"});
      continue;
    }
    result.documents.push_back(std::move(doc));
  }
  for (const auto& k : unknown) result.warnings.push_back("unknown field '" + k + "' ignored");
}

// "First [Middle] Last" with ';' between people, used by the flat CSV form.
inline std::vector<Author> parse_author_list(std::string_view s) {
  std::vector<Author> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t semi = s.find(';', start);
    std::string_view item = s.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
    std::vector<std::string> parts;
    std::string cur;
    for (char c : item) {
      if (c == ' ' || c == '\t') {
        if (!cur.empty()) parts.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    if (!parts.empty()) {
      Author a;
      a.name.last = parts.back();
      if (parts.size() >= 2) a.name.first = parts.front();
      for (std::size_t k = 1; k + 1 < parts.size(); ++k) {
        if (!a.name.middle.empty()) a.name.middle.push_back(' ');
        a.name.middle += parts[k];
      }
      out.push_back(std::move(a));
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return out;
}

}  // namespace detail

inline IngestResult ingest_jsonl_text(std::string_view text, unsigned threads = 1) {
  IngestResult result;
  std::vector<std::string_view> records;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    records.push_back(line);
    lines.push_back(line_no);
  }
  std::vector<detail::ParsedRecord> parsed(records.size(), detail::ParsedRecord{detail::RecordError{}, {}, {}});
  parallel_for(records.size(), threads, [&](std::size_t i) { parsed[i] = detail::parse_json_record(records[i]); });
  detail::collect(result, parsed, lines);
  return result;
}

// Flat metadata: id,kind,text,field,year,authors[,lawyer][,language]. Authors
// are "First Middle Last" separated by ';'. Citation lists are not carried.
inline IngestResult ingest_csv_text(std::string_view text) {
  IngestResult result;
  const auto rows = csv::parse(text);
  if (rows.empty()) return result;
  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = detail::ascii_lower(header[i]);
    if (name == "id" || name == "kind" || name == "text" || name == "field" || name == "year" || name == "authors" ||
        name == "lawyer" || name == "language")
      col[name] = i;
    else
      result.warnings.push_back("unknown field '" + header[i] + "' ignored");
  }
  std::vector<detail::ParsedRecord> parsed;
  std::vector<std::size_t> lines;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    auto cell = [&](std::string_view name) -> std::optional<std::string> {
      auto it = col.find(name);
      if (it == col.end() || it->second >= f.size()) return std::nullopt;
      return f[it->second];
    };
    detail::ParsedRecord p{detail::RecordError{}, cell("id").value_or(""), {}};
    try {
      Document d;
      auto need = [&](std::string_view name, bool allow_empty = false) {
        auto v = cell(name);
        if (!v || (!allow_empty && v->empty())) throw detail::RecordError{"missing " + std::string(name)};
        return *v;
      };
      d.id = need("id");
      auto kind = parse_doc_kind(need("kind"));
      if (!kind) throw detail::RecordError{"invalid kind"};
      d.kind = *kind;
      d.text = need("text", true);
      d.field = need("field");
      auto year = parse_int(need("year"));
      if (!year) throw detail::RecordError{"invalid year"};
      d.year = static_cast<int>(*year);
      d.authors = detail::parse_author_list(need("authors", true));
      if (auto l = cell("lawyer"); l && !l->empty()) d.lawyers = detail::parse_author_list(*l);
      if (auto lang = cell("language"); lang && !lang->empty()) d.language = *lang;
      p.value = std::move(d);
    } catch (const detail::RecordError& e) {
      p.value = e;
    }
    parsed.push_back(std::move(p));
    lines.push_back(rows[r].line);
  }
  detail::collect(result, parsed, lines);
  return result;
}

inline IngestResult ingest(const std::filesystem::path& path, Schema schema, unsigned threads = 1) {
  const std::string text = read_file(path);
  return schema == Schema::Csv ? ingest_csv_text(text) : ingest_jsonl_text(text, threads);
}

inline IngestResult ingest(const std::filesystem::path& path, unsigned threads = 1) {
  return ingest(path, schema_for_path(path), threads);
}

// ---------------------------------------------------------------- export

namespace detail {

inline nlohmann::ordered_json author_json(const Author& a) {
  nlohmann::ordered_json j;
  j["first"] = a.name.first;
  if (!a.name.middle.empty()) j["middle"] = a.name.middle;
  j["last"] = a.name.last;
  if (a.gender) j["gender"] = std::string(to_string(*a.gender));
  if (!a.id.empty()) j["id"] = a.id;
  return j;
}

}  // namespace detail

inline std::string to_jsonl(const Document& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["kind"] = std::string(to_string(d.kind));
  j["text"] = d.text;
  j["field"] = d.field;
  j["year"] = d.year;
  j["authors"] = nlohmann::ordered_json::array();
  for (const auto& a : d.authors) j["authors"].push_back(detail::author_json(a));
  if (d.lawyers.size() == 1) {
    j["lawyer"] = detail::author_json(d.lawyers.front());
  } else if (!d.lawyers.empty()) {
    j["lawyer"] = nlohmann::ordered_json::array();
    for (const auto& l : d.lawyers) j["lawyer"].push_back(detail::author_json(l));
  }
  if (d.language) j["language"] = *d.language;
  if (!d.cited_by.empty()) {
    j["cited_by"] = nlohmann::ordered_json::array();
    for (const auto& c : d.cited_by) {
      nlohmann::ordered_json r;
      r["id"] = c.citing_doc_id;
      if (c.first_author_gender != Gender::Unknown) r["first_author_gender"] = std::string(to_string(c.first_author_gender));
      if (c.last_author_gender != Gender::Unknown) r["last_author_gender"] = std::string(to_string(c.last_author_gender));
      if (!c.citing_author_ids.empty()) r["citing_author_ids"] = c.citing_author_ids;
      j["cited_by"].push_back(std::move(r));
    }
  }
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

inline std::string export_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    out += to_jsonl(d);
    out.push_back('\n');
  }
  return out;
}

inline std::string rejects_csv(std::span<const Reject> rejects) {
  std::string out = csv::join({"line", "id", "reason"});
  for (const auto& r : rejects) out += csv::join({std::to_string(r.line), r.id, r.reason});
  return out;
}

// ---------------------------------------------------------------- filter

enum class DropReason { Year, Language, NoAuthor, Team, Lawyer, WordCount };
inline constexpr std::array kDropReasons = {DropReason::Year,   DropReason::Language, DropReason::NoAuthor,
                                            DropReason::Team,   DropReason::Lawyer,   DropReason::WordCount};

inline std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Year: return "YEAR";
    case DropReason::Language: return "LANGUAGE";
    case DropReason::NoAuthor: return "NO_AUTHOR";
    case DropReason::Team: return "TEAM";
    case DropReason::Lawyer: return "LAWYER";
    case DropReason::WordCount: return "WORDCOUNT";
  }
  return "?";
}

struct FilterPolicy {
  std::size_t min_words = 100;  // kept iff word count is strictly greater
  bool solo_only = false;
  bool require_single_lawyer = false;
  bool allow_unset_language = true;
  std::string language = "en";
  bool paper_year_defaults = false;  // enforce the start years below
  int min_year_paper = 1991;
  int min_year_patent = 1976;
};

// Paper-default mode: solo authors, single lawyer, start years enforced.
inline FilterPolicy paper_default_policy() {
  FilterPolicy p;
  p.solo_only = true;
  p.require_single_lawyer = true;
  p.paper_year_defaults = true;
  return p;
}

struct Dropped {
  std::string id;
  DropReason reason;
};

struct FilterResult {
  std::vector<Document> kept;
  std::vector<Dropped> dropped;

  std::size_t count(DropReason r) const {
    return static_cast<std::size_t>(
        std::count_if(dropped.begin(), dropped.end(), [r](const Dropped& d) { return d.reason == r; }));
  }
};

// Every check except the word count, in funnel order.
inline std::optional<DropReason> check_metadata(const Document& d, const FilterPolicy& p) {
  if (p.paper_year_defaults) {
    const int min_year = d.kind == DocKind::Paper ? p.min_year_paper : p.min_year_patent;
    if (d.year < min_year) return DropReason::Year;
  }
  if (d.language ? detail::ascii_lower(*d.language) != detail::ascii_lower(p.language) : !p.allow_unset_language)
    return DropReason::Language;
  if (d.authors.empty()) return DropReason::NoAuthor;
  if (p.solo_only && d.authors.size() != 1) return DropReason::Team;
  if (p.require_single_lawyer && d.kind == DocKind::Patent && d.lawyers.size() != 1) return DropReason::Lawyer;
  return std::nullopt;
}

// First failing check, in funnel order; nullopt when the document is kept.
inline std::optional<DropReason> check_document(const Document& d, const FilterPolicy& p) {
  if (auto r = check_metadata(d, p)) return r;
  if (word_count(tokenize(d.text)) <= p.min_words) return DropReason::WordCount;
  return std::nullopt;
}

inline FilterResult filter_corpus(std::span<const Document> docs, const FilterPolicy& policy, unsigned threads = 1) {
  std::vector<std::optional<DropReason>> verdict(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { verdict[i] = check_document(docs[i], policy); }, 16);
  FilterResult out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (verdict[i])
      out.dropped.push_back({docs[i].id, *verdict[i]});
    else
      out.kept.push_back(docs[i]);
  }
  return out;
}

inline std::string funnel_csv(const FilterResult& r, std::size_t total) {
  std::string out = csv::join({"stage", "count"});
  out += csv::join({"input", std::to_string(total)});
  for (auto reason : kDropReasons) out += csv::join({"dropped_" + std::string(to_string(reason)), std::to_string(r.count(reason))});
  out += csv::join({"kept", std::to_string(r.kept.size())});
  return out;
}

// ---------------------------------------------------------------- matching

struct MatchCandidate {
  std::string id;
  std::string field;
  int year = 0;
  Gender gender = Gender::Unknown;
};

struct MatchedPair {
  std::string female_id;
  std::string male_id;
  std::string field;
  int year = 0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::string> unmatched_female;
  std::size_t unused_male = 0;
  std::size_t excluded_unknown = 0;
};

inline constexpr std::string_view kMatchPolicy = "seeded-uniform-within-field-year";

// Within each (field, year) stratum, females are visited in id order and each
// draws a uniformly random unused male. Every stratum has its own generator
// derived from the seed and the stratum label, so results do not depend on
// how strata are scheduled across threads.
inline MatchResult match_sample(std::span<const MatchCandidate> candidates, std::uint64_t seed, unsigned threads = 1) {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::pair<std::vector<std::string>, std::vector<std::string>>> strata;
  MatchResult out;
  for (const auto& c : candidates) {
    if (c.gender == Gender::Unknown) {
      ++out.excluded_unknown;
      continue;
    }
    auto& s = strata[{c.field, c.year}];
    (c.gender == Gender::Female ? s.first : s.second).push_back(c.id);
  }
  std::vector<const std::pair<const Key, std::pair<std::vector<std::string>, std::vector<std::string>>>*> order;
  for (const auto& kv : strata) order.push_back(&kv);
  std::vector<MatchResult> partial(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    const auto& [key, members] = *order[i];
    auto females = members.first;
    auto males = members.second;
    std::sort(females.begin(), females.end());
    std::sort(males.begin(), males.end());
    Rng rng(derive_seed(seed, key.first + '\x1f' + std::to_string(key.second)));
    auto& res = partial[i];
    for (const auto& f : females) {
      if (males.empty()) {
        res.unmatched_female.push_back(f);
        continue;
      }
      const auto pick = static_cast<std::size_t>(rng.below(males.size()));
      res.pairs.push_back({f, males[pick], key.first, key.second});
      males[pick] = std::move(males.back());
      males.pop_back();
    }
    res.unused_male = males.size();
  }, 1);
  for (auto& p : partial) {
    out.pairs.insert(out.pairs.end(), p.pairs.begin(), p.pairs.end());
    out.unmatched_female.insert(out.unmatched_female.end(), p.unmatched_female.begin(), p.unmatched_female.end());
    out.unused_male += p.unused_male;
  }
  return out;
}

inline std::vector<MatchCandidate> match_candidates(std::span<const Document> docs) {
  std::vector<MatchCandidate> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d.id, d.field, d.year, author_gender(d)});
  return out;
}

inline MatchResult match_sample(std::span<const Document> docs, std::uint64_t seed, unsigned threads = 1) {
  const auto c = match_candidates(docs);
  return match_sample(std::span<const MatchCandidate>(c), seed, threads);
}

inline std::string pairs_csv(std::span<const MatchedPair> pairs) {
  std::string out = csv::join({"female_id", "male_id", "field", "year"});
  for (const auto& p : pairs) out += csv::join({p.female_id, p.male_id, p.field, std::to_string(p.year)});
  return out;
}

}  // namespace stylo
