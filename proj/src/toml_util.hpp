#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#define TOML_EXCEPTIONS 1
#define TOML_HEADER_ONLY 0
#include <toml.hpp>

#include "medteb/error.hpp"

namespace medteb {

inline toml::table parse_toml_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("no such file: " + path.string());
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ValidationError(path.string() + ":" + std::to_string(e.source().begin.line) + ": " +
                          std::string(e.description()));
  }
}

inline std::string toml_required_string(const toml::table& t, const char* key, const std::filesystem::path& file) {
  const auto v = t[key].value<std::string>();
  if (!v) throw ValidationError(file.string() + ": missing string key \"" + key + "\"");
  return *v;
}

// TOML integers are signed; seeds may also be given as decimal strings to reach
// the full unsigned range.
inline std::uint64_t toml_u64(const toml::table& t, const char* key, std::uint64_t fallback) {
  const auto node = t[key];
  if (!node) return fallback;
  if (const auto i = node.value<std::int64_t>()) {
    if (*i < 0) throw ValidationError(std::string("\"") + key + "\" must be nonnegative");
    return static_cast<std::uint64_t>(*i);
  }
  if (const auto s = node.value<std::string>()) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(*s, &used);
      if (used == s->size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw ValidationError(std::string("\"") + key + "\" must be an unsigned integer");
}

inline std::vector<double> toml_doubles(const toml::table& t, const char* key, std::vector<double> fallback) {
  const toml::array* arr = t[key].as_array();
  if (arr == nullptr) return fallback;
  std::vector<double> out;
  for (const auto& n : *arr) {
    const auto v = n.value<double>();
    if (!v) throw ValidationError(std::string("\"") + key + "\" must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

}  // namespace medteb
