#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "medteb/builder.hpp"
#include "medteb/error.hpp"
#include "medteb/metrics.hpp"
#include "medteb/pipelines.hpp"
#include "medteb/runner.hpp"
#include "medteb/text.hpp"

namespace py = pybind11;
using namespace medteb;
namespace fs = std::filesystem;

namespace {

std::string evaluate(const fs::path& manifest, const fs::path& provider, std::size_t parallel,
                     const std::string& format, bool include_timing) {
  RunOptions opts;
  opts.parallel = parallel;
  BenchmarkReport report;
  {
    py::gil_scoped_release release;
    report = run_benchmark(load_manifest(manifest), load_provider_spec(provider), opts);
  }
  return render_report(report, parse_report_format(format), include_timing);
}

py::dict aggregate_scores(const std::vector<py::dict>& rows) {
  std::vector<TaskScore> tasks;
  for (const auto& r : rows) {
    TaskScore t;
    t.task_id = r["task_id"].cast<std::string>();
    t.category = parse_category(r["category"].cast<std::string>());
    t.source = r["source"].cast<std::string>();
    t.score = r["score"].cast<double>();
    tasks.push_back(std::move(t));
  }
  const auto a = aggregate(tasks);
  py::dict per_category;
  for (const auto& [c, s] : a.per_category)
    per_category[py::str(std::string(to_string(c)))] = py::dict(py::arg("mean") = s.mean, py::arg("std") = s.std,
                                                                 py::arg("count") = s.count);
  py::dict out;
  out["per_category"] = per_category;
  out["avg_type"] = a.avg_type;
  out["avg_all"] = a.avg_all;
  out["per_source"] = a.per_source;
  return out;
}

}  // namespace

PYBIND11_MODULE(_medteb, m) {
  auto base = py::register_exception<Error>(m, "MedtebError");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ProviderError>(m, "ProviderError", base.ptr());
  py::register_exception<TaskError>(m, "TaskError", base.ptr());

  m.def("preprocess_text", [](const std::string& s) { return preprocess_text(s); });
  m.def("first_sentence", [](const std::string& s) { return first_sentence(s); });

  m.def("macro_f1", [](const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    return macro_f1(std::span<const std::string>(pred), std::span<const std::string>(gold));
  }, py::arg("predicted"), py::arg("gold"));
  m.def("v_measure", [](const std::vector<int>& clusters, const std::vector<int>& gold) {
    return v_measure(std::span<const int>(clusters), std::span<const int>(gold));
  }, py::arg("assignments"), py::arg("gold"));
  m.def("ndcg_at_k", [](const std::vector<std::string>& ranked, const std::unordered_map<std::string, std::int64_t>& rel,
                        std::size_t k) { return ndcg_at_k(ranked, rel, k); },
        py::arg("ranked"), py::arg("relevant"), py::arg("k") = 10);
  m.def("pair_score", [](const std::vector<double>& u, const std::vector<double>& v, const std::string& metric) {
    return pair_score(u, v, parse_pair_metric(metric));
  }, py::arg("u"), py::arg("v"), py::arg("metric") = "cosine");

  m.def("aggregate", &aggregate_scores, py::arg("tasks"));
  m.def("evaluate", &evaluate, py::arg("manifest"), py::arg("provider"), py::arg("parallel") = 1,
        py::arg("format") = "json", py::arg("include_timing") = true);
  m.def("build", [](const std::string& kind, const fs::path& in, const fs::path& rule, std::uint64_t seed,
                    const fs::path& out) {
    py::gil_scoped_release release;
    return run_build(parse_build_kind(kind), in, rule, seed, out);
  }, py::arg("kind"), py::arg("input"), py::arg("rule"), py::arg("seed"), py::arg("out"));
  m.def("dedup", [](const fs::path& train, const fs::path& bench, const fs::path& out) {
    py::gil_scoped_release release;
    return run_dedup(train, bench, out);
  }, py::arg("train"), py::arg("benchmark"), py::arg("out"));
  m.def("train_head", [](const fs::path& pairs, const fs::path& provider, const fs::path& config, const fs::path& out) {
    py::gil_scoped_release release;
    const auto r = run_train_head(pairs, provider, config, out);
    return r.log.empty() ? 0.0 : r.log.back().train_loss;
  }, py::arg("pairs"), py::arg("provider"), py::arg("config"), py::arg("out"),
        "Trains a projection head; returns the final training loss.");
}
