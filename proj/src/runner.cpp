#include "medteb/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <mutex>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "medteb/rng.hpp"

namespace medteb {

using nlohmann::json;

Aggregate aggregate(std::span<const TaskScore> per_task) {
  if (per_task.empty()) throw ValidationError("aggregate: no task scores");
  std::map<Category, std::vector<double>> by_cat;
  std::map<std::string, std::pair<double, std::size_t>> by_src;
  double total = 0.0;
  for (const auto& t : per_task) {
    by_cat[t.category].push_back(t.score);
    auto& s = by_src[t.source];
    s.first += t.score;
    ++s.second;
    total += t.score;
  }
  Aggregate a;
  double type_sum = 0.0;
  for (const auto& [cat, scores] : by_cat) {
    const double n = static_cast<double>(scores.size());
    double sum = 0.0;
    for (double x : scores) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : scores) ss += (x - mean) * (x - mean);
    a.per_category[cat] = {mean, std::sqrt(ss / n), scores.size()};
    type_sum += mean;
  }
  a.avg_type = type_sum / static_cast<double>(by_cat.size());
  a.avg_all = total / static_cast<double>(per_task.size());
  for (const auto& [src, s] : by_src) a.per_source[src] = s.first / static_cast<double>(s.second);
  return a;
}

namespace {

[[noreturn]] void rethrow_for_task(const std::string& task_id, std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ProviderError& e) {
    throw ProviderError("task " + task_id + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("task " + task_id + ": " + e.what());
  } catch (const std::exception& e) {
    throw TaskError("task " + task_id + ": " + e.what());
  }
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, EmbeddingProvider& provider,
                              const RunOptions& options) {
  validate_manifest(manifest);
  provider.dim();  // handshake before any task starts

  const std::size_t n = manifest.tasks.size();
  std::vector<std::optional<TaskScore>> scores(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed.load(); i = next++) {
      const auto& task = manifest.tasks[i];
      try {
        const TaskDataset data = load_dataset(task.path, task.category);
        const auto t0 = std::chrono::steady_clock::now();
        TaskScore s = evaluate_task(provider, task, data, derive_seed(manifest.master_seed, task.task_id),
                                    options.eval);
        s.eval_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        s.category = task.category;
        scores[i] = std::move(s);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };

  const auto wall0 = std::chrono::steady_clock::now();
  const std::size_t workers =
      provider.supports_concurrency() ? std::clamp<std::size_t>(options.parallel, 1, std::max<std::size_t>(n, 1)) : 1;
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    for (std::size_t w = 0; w < workers; ++w) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) rethrow_for_task(manifest.tasks[i].task_id, errors[i]);

  BenchmarkReport r;
  r.model_name = provider.name();
  r.manifest_name = manifest.name;
  r.master_seed = manifest.master_seed;
  double summed = 0.0;
  for (auto& s : scores) {
    summed += s->eval_seconds;
    r.per_task.push_back(std::move(*s));
  }
  // Sequential runs report the summed task time; parallel runs the wall time.
  r.total_eval_seconds = workers == 1 ? summed : wall;
  r.summary = aggregate(r.per_task);
  return r;
}

BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const ProviderSpec& provider,
                              const RunOptions& options) {
  auto p = make_provider(provider);
  return run_benchmark(manifest, *p, options);
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(s) + "'");
}

namespace {

json to_json(const BenchmarkReport& r, bool timing) {
  json tasks = json::array();
  for (const auto& t : r.per_task) {
    json jt = {{"task_id", t.task_id},
               {"category", std::string(to_string(t.category))},
               {"source", t.source},
               {"score", t.score}};
    if (timing) jt["eval_seconds"] = t.eval_seconds;
    if (t.details) {
      json f1 = json::object();
      for (const auto& [m, v] : t.details->test_f1) f1[std::string(to_string(m))] = v;
      jt["details"] = {{"metric", std::string(to_string(t.details->metric))},
                       {"threshold", t.details->threshold},
                       {"test_f1", f1}};
    }
    tasks.push_back(std::move(jt));
  }
  json cats = json::object();
  for (const auto& [c, s] : r.summary.per_category)
    cats[std::string(to_string(c))] = {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
  json j = {{"model", r.model_name},
            {"manifest", r.manifest_name},
            {"master_seed", r.master_seed},
            {"tasks", tasks},
            {"per_category", cats},
            {"avg_type", r.summary.avg_type},
            {"avg_all", r.summary.avg_all},
            {"per_source", r.summary.per_source}};
  if (timing) j["total_eval_seconds"] = r.total_eval_seconds;
  return j;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_markdown(const BenchmarkReport& r) {
  std::ostringstream o;
  o << "| Model | Classification | Clustering | Pair Cls. | Retrieval | AvgType | AvgAll | EvalTime |\n";
  o << "|---|---|---|---|---|---|---|---|\n";
  o << "| " << r.model_name;
  for (Category c : kAllCategories) {
    const auto it = r.summary.per_category.find(c);
    if (it == r.summary.per_category.end()) o << " | -";
    else o << " | " << fmt("%.3f", it->second.mean) << " ± " << fmt("%.3f", it->second.std);
  }
  o << " | " << fmt("%.3f", r.summary.avg_type) << " | " << fmt("%.3f", r.summary.avg_all) << " | "
    << fmt("%.1f", r.total_eval_seconds) << " |\n";

  o << "\n| Model";
  for (const auto& [src, _] : r.summary.per_source) o << " | " << src;
  o << " |\n|---";
  for (std::size_t i = 0; i < r.summary.per_source.size(); ++i) o << "|---";
  o << "|\n| " << r.model_name;
  for (const auto& [_, v] : r.summary.per_source) o << " | " << fmt("%.3f", v);
  o << " |\n";

  o << "\n| Task | Category | Source | Score | Seconds |\n|---|---|---|---|---|\n";
  for (const auto& t : r.per_task)
    o << "| " << t.task_id << " | " << to_string(t.category) << " | " << t.source << " | " << fmt("%.4f", t.score)
      << " | " << fmt("%.2f", t.eval_seconds) << " |\n";
  return o.str();
}

std::string render_csv(const BenchmarkReport& r, bool timing) {
  std::ostringstream o;
  o << "model,task_id,category,source,score";
  if (timing) o << ",eval_seconds";
  o << '\n';
  for (const auto& t : r.per_task) {
    o << csv_field(r.model_name) << ',' << csv_field(t.task_id) << ',' << to_string(t.category) << ','
      << csv_field(t.source) << ',' << fmt("%.17g", t.score);
    if (timing) o << ',' << fmt("%.6f", t.eval_seconds);
    o << '\n';
  }
  return o.str();
}

}  // namespace

std::string render_report(const BenchmarkReport& report, ReportFormat format, bool include_timing) {
  switch (format) {
    case ReportFormat::json: return to_json(report, include_timing).dump(2) + "\n";
    case ReportFormat::markdown: return render_markdown(report);
    case ReportFormat::csv: return render_csv(report, include_timing);
  }
  throw ValidationError("unknown report format");
}

BenchmarkReport parse_report_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    BenchmarkReport r;
    r.model_name = j.at("model").get<std::string>();
    r.manifest_name = j.value("manifest", std::string());
    r.master_seed = j.value("master_seed", std::uint64_t{0});
    for (const auto& jt : j.at("tasks")) {
      TaskScore t;
      t.task_id = jt.at("task_id").get<std::string>();
      t.category = parse_category(jt.at("category").get<std::string>());
      t.source = jt.at("source").get<std::string>();
      t.score = jt.at("score").get<double>();
      t.eval_seconds = jt.value("eval_seconds", 0.0);
      if (jt.contains("details")) {
        const auto& d = jt["details"];
        PairDetails pd;
        pd.metric = parse_pair_metric(d.at("metric").get<std::string>());
        pd.threshold = d.at("threshold").get<double>();
        for (const auto& [k, v] : d.at("test_f1").items()) pd.test_f1[parse_pair_metric(k)] = v.get<double>();
        t.details = pd;
      }
      r.per_task.push_back(std::move(t));
    }
    for (const auto& [k, v] : j.at("per_category").items())
      r.summary.per_category[parse_category(k)] = {v.at("mean").get<double>(), v.at("std").get<double>(),
                                                   v.at("count").get<std::size_t>()};
    r.summary.avg_type = j.at("avg_type").get<double>();
    r.summary.avg_all = j.at("avg_all").get<double>();
    r.summary.per_source = j.at("per_source").get<std::map<std::string, double>>();
    r.total_eval_seconds = j.value("total_eval_seconds", 0.0);
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report json: ") + e.what());
  }
}

}  // namespace medteb
