#pragma once

// Client for genderize-compatible services:
//   GET <base>/<path>?name=<name>[&apikey=<key>]
//   -> {"name": "...", "gender": "female"|"male"|null, "probability": 0.98, ...}
// Connection errors, non-200 statuses and unreadable bodies are transient:
// they yield UNKNOWN and are never written to the cache.

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "stylo/gender.hpp"

namespace stylo {

struct HttpProviderConfig {
  std::string base_url = "https://api.genderize.io";  // scheme://host[:port]
  std::string path = "/";
  std::string api_key;
  int timeout_seconds = 10;
  int retries = 1;  // extra attempts after a transient failure
  std::chrono::milliseconds backoff{200};
};

class HttpGenderProvider final : public GenderProvider {
 public:
  explicit HttpGenderProvider(HttpProviderConfig config) : config_(std::move(config)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (config_.base_url.starts_with("https://"))
      throw SpecError("https endpoints need a build with CPPHTTPLIB_OPENSSL_SUPPORT");
#endif
  }

  GenderSource source() const override { return GenderSource::ExternalApi; }

  LookupResult lookup(const std::string& key) override {
    LookupResult last;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(config_.backoff * attempt);
      last = attempt_once(key);
      if (last.status == LookupStatus::Ok) return last;
    }
    return last;
  }

  static LookupResult parse_response(std::string_view body) {
    LookupResult r;
    try {
      const auto j = nlohmann::json::parse(body);
      if (!j.is_object()) return transient("response is not an object");
      const auto g = j.find("gender");
      if (g == j.end() || g->is_null()) return r;  // name unknown to the service
      if (!g->is_string()) return transient("gender is not a string");
      const auto parsed = parse_gender(g->get_ref<const std::string&>());
      if (!parsed) return transient("unrecognized gender value");
      const auto p = j.find("probability");
      if (p == j.end() || !p->is_number()) return transient("missing probability");
      r.gender = *parsed;
      r.probability = p->get<double>();
      if (r.probability < 0.0 || r.probability > 1.0) return transient("probability out of range");
      return r;
    } catch (const nlohmann::json::exception&) {
      return transient("malformed JSON response");
    }
  }

 private:
  static LookupResult transient(std::string why) {
    LookupResult r;
    r.status = LookupStatus::Transient;
    r.error = std::move(why);
    return r;
  }

  LookupResult attempt_once(const std::string& key) const {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Params params{{"name", key}};
    if (!config_.api_key.empty()) params.emplace("apikey", config_.api_key);
    auto res = client.Get(config_.path, params, httplib::Headers{});
    if (!res) return transient("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) return transient("HTTP status " + std::to_string(res->status));
    return parse_response(res->body);
  }

  HttpProviderConfig config_;
};

}  // namespace stylo
