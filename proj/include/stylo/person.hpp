#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "stylo/error.hpp"
#include "stylo/tagger.hpp"

namespace stylo {

enum class Gender { Female, Male, Unknown };

inline std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Female: return "F";
    case Gender::Male: return "M";
    case Gender::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

// Accepts F/M/U/UNKNOWN and female/male, case-insensitive.
inline std::optional<Gender> parse_gender(std::string_view s) {
  const std::string v = detail::ascii_lower(s);
  if (v == "f" || v == "female") return Gender::Female;
  if (v == "m" || v == "male") return Gender::Male;
  if (v == "u" || v == "unknown" || v.empty()) return Gender::Unknown;
  return std::nullopt;
}

struct PersonName {
  std::string first;
  std::string middle;
  std::string last;

  friend bool operator==(const PersonName&, const PersonName&) = default;
};

inline std::string display_name(const PersonName& n) {
  std::string out = n.first;
  for (const std::string* part : {&n.middle, &n.last}) {
    if (part->empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += *part;
  }
  return out;
}

}  // namespace stylo
