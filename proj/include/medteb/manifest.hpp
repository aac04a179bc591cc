#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medteb/dataset.hpp"

namespace medteb {

struct TaskManifest {
  std::string task_id;
  Category category = Category::classification;
  std::string source;
  std::filesystem::path path;  // resolved against the manifest's directory
};

struct BenchmarkManifest {
  std::string name;
  std::vector<TaskManifest> tasks;
  std::uint64_t master_seed = 0;
};

struct ManifestSummary {
  std::map<Category, std::map<std::string, int>> by_category_source;
  std::map<Category, int> by_category;
  int total = 0;
};

// Parses the TOML manifest. Relative task paths resolve against the manifest file.
BenchmarkManifest load_manifest(const std::filesystem::path& toml_path);

// Checks task ids are unique, every dataset path exists, and each dataset has
// the shape its category requires (first record is sniffed, not fully loaded).
// Throws ValidationError naming the offending task.
ManifestSummary validate_manifest(const BenchmarkManifest& manifest);

}  // namespace medteb
