#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medteb/evaluators.hpp"
#include "medteb/manifest.hpp"
#include "medteb/providers.hpp"

namespace medteb {

struct CategoryStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;

  friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct Aggregate {
  std::map<Category, CategoryStats> per_category;  // only categories that occur
  double avg_type = 0.0;                           // mean of the category means
  double avg_all = 0.0;                            // mean over all tasks
  std::map<std::string, double> per_source;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

// Throws ValidationError on an empty list.
Aggregate aggregate(std::span<const TaskScore> per_task);

struct BenchmarkReport {
  std::string model_name;
  std::string manifest_name;
  std::uint64_t master_seed = 0;
  std::vector<TaskScore> per_task;  // manifest order
  Aggregate summary;
  double total_eval_seconds = 0.0;

  friend bool operator==(const BenchmarkReport&, const BenchmarkReport&) = default;
};

struct RunOptions {
  std::size_t parallel = 1;  // >1 only takes effect when the provider supports concurrency
  EvalOptions eval;
};

// Evaluates every task with seed derive_seed(master_seed, task_id). The first
// failing task (in manifest order) aborts the run; its id is in the message.
BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, EmbeddingProvider& provider,
                              const RunOptions& options = {});
BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const ProviderSpec& provider,
                              const RunOptions& options = {});

enum class ReportFormat { json, markdown, csv };
ReportFormat parse_report_format(std::string_view s);

// With include_timing = false the JSON omits every wall-clock field, so two
// runs with the same seed render byte-identically.
std::string render_report(const BenchmarkReport& report, ReportFormat format, bool include_timing = true);
BenchmarkReport parse_report_json(std::string_view json_text);

}  // namespace medteb
