#pragma once

// Run manifests: the command, effective options, seed, policy choices and
// SHA-256 digests of every input and output. No timestamps or host details
// are recorded, so equal runs write equal manifests.
//
// Requires OpenSSL's libcrypto (CMake target stylo::openssl).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "stylo/error.hpp"
#include "stylo/io.hpp"

namespace stylo {

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

struct ManifestFile {
  std::string path;  // inputs: as given; outputs: relative to the manifest
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::string tool_version;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> options;
  std::map<std::string, std::string> policies;
  std::vector<ManifestFile> inputs;
  std::vector<ManifestFile> outputs;

  void add_input(const std::filesystem::path& p) { inputs.push_back({p.generic_string(), sha256_file(p)}); }
  void add_output(std::string name, std::string_view contents) {
    outputs.push_back({std::move(name), sha256_hex(contents)});
  }
};

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json();
  j["options"] = m.options;
  j["policies"] = m.policies;
  auto files = [](const std::vector<ManifestFile>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return a;
  };
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  return j;
}

inline std::string manifest_text(const RunManifest& m) { return to_json(m).dump(2) + "\n"; }

inline RunManifest parse_manifest(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    m.options = j.at("options").get<std::map<std::string, std::string>>();
    m.policies = j.at("policies").get<std::map<std::string, std::string>>();
    for (const auto& f : j.at("inputs")) m.inputs.push_back({f.at("path"), f.at("sha256")});
    for (const auto& f : j.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha256")});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

struct FileCheck {
  std::string role;  // "input" or "output"
  std::string path;
  std::string expected;
  std::string actual;  // empty when the file could not be read
  bool ok() const { return !actual.empty() && actual == expected; }
};

// Recomputes every digest. Outputs resolve against the manifest's directory;
// relative inputs against the working directory.
inline std::vector<FileCheck> verify_manifest(const std::filesystem::path& manifest_path) {
  const RunManifest m = parse_manifest(read_file(manifest_path));
  const auto dir = manifest_path.parent_path();
  std::vector<FileCheck> out;
  auto check = [&](std::string role, const ManifestFile& f, const std::filesystem::path& resolved) {
    FileCheck c{std::move(role), f.path, f.sha256, {}};
    try {
      c.actual = sha256_file(resolved);
    } catch (const IoError&) {
    }
    out.push_back(std::move(c));
  };
  for (const auto& f : m.inputs) check("input", f, f.path);
  for (const auto& f : m.outputs) check("output", f, dir / f.path);
  return out;
}

}  // namespace stylo
