#include "medteb/manifest.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "toml_util.hpp"

namespace medteb {

namespace fs = std::filesystem;

BenchmarkManifest load_manifest(const fs::path& toml_path) {
  const toml::table root = parse_toml_file(toml_path);
  const fs::path base = toml_path.parent_path();

  BenchmarkManifest m;
  m.name = root["name"].value_or(std::string(toml_path.stem().string()));
  m.master_seed = toml_u64(root, "master_seed", 0);

  const toml::array* tasks = root["tasks"].as_array();
  if (tasks == nullptr) throw ValidationError(toml_path.string() + ": missing [[tasks]] array");
  for (const auto& node : *tasks) {
    const toml::table* t = node.as_table();
    if (t == nullptr) throw ValidationError(toml_path.string() + ": [[tasks]] entries must be tables");
    TaskManifest task;
    task.task_id = toml_required_string(*t, "task_id", toml_path);
    task.category = parse_category(toml_required_string(*t, "category", toml_path));
    task.source = toml_required_string(*t, "source", toml_path);
    const fs::path p = toml_required_string(*t, "path", toml_path);
    task.path = p.is_absolute() ? p : base / p;
    m.tasks.push_back(std::move(task));
  }
  return m;
}

namespace {

std::string first_nonblank_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  return {};
}

bool first_record_has(const fs::path& path, std::initializer_list<const char*> keys) {
  const std::string line = first_nonblank_line(path);
  if (line.empty()) return false;
  const auto obj = nlohmann::json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return false;
  for (const char* k : keys) {
    if (!obj.contains(k)) return false;
  }
  return true;
}

void check_shape(const TaskManifest& task) {
  const std::string prefix = "task \"" + task.task_id + "\": ";
  if (!fs::exists(task.path)) throw ValidationError(prefix + "dataset path does not exist: " + task.path.string());
  bool ok = false;
  switch (task.category) {
    case Category::classification:
    case Category::clustering:
      ok = fs::is_regular_file(task.path) && first_record_has(task.path, {"id", "text", "label", "split"});
      break;
    case Category::pair_classification:
      ok = fs::is_regular_file(task.path) && first_record_has(task.path, {"id", "sent1", "sent2", "label", "split"});
      break;
    case Category::retrieval:
      ok = fs::is_directory(task.path) && fs::exists(task.path / "qrels.tsv") &&
           first_record_has(task.path / "corpus.jsonl", {"_id", "text"}) &&
           first_record_has(task.path / "queries.jsonl", {"_id", "text"});
      break;
  }
  if (!ok) {
    throw ValidationError(prefix + "dataset at " + task.path.string() + " does not have the shape required by category " +
                          std::string(to_string(task.category)));
  }
}

}  // namespace

ManifestSummary validate_manifest(const BenchmarkManifest& manifest) {
  if (manifest.tasks.empty()) throw ValidationError("manifest \"" + manifest.name + "\" has no tasks");
  std::set<std::string> ids;
  ManifestSummary summary;
  for (const auto& task : manifest.tasks) {
    if (task.task_id.empty()) throw ValidationError("manifest contains a task with an empty task_id");
    if (!ids.insert(task.task_id).second) throw ValidationError("duplicate task_id \"" + task.task_id + "\"");
    check_shape(task);
    ++summary.by_category_source[task.category][task.source];
    ++summary.by_category[task.category];
    ++summary.total;
  }
  return summary;
}

}  // namespace medteb
