#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "medteb/error.hpp"
#include "medteb/manifest.hpp"
#include "medteb/pipelines.hpp"
#include "medteb/runner.hpp"

namespace fs = std::filesystem;
using namespace medteb;

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* extension_for(ReportFormat f) {
  switch (f) {
    case ReportFormat::json: return "json";
    case ReportFormat::markdown: return "md";
    case ReportFormat::csv: return "csv";
  }
  return "txt";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medteb: medical text embedding benchmark runner"};
  app.require_subcommand(1);

  // eval
  auto* eval = app.add_subcommand("eval", "Run a benchmark manifest against a provider");
  std::string manifest_path, provider_path, out_dir, format = "json";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t parallel = 1;
  eval->add_option("--manifest", manifest_path)->required();
  eval->add_option("--provider", provider_path)->required();
  auto* seed_opt = eval->add_option("--seed", seed, "master seed (overrides the manifest)");
  eval->add_option("--out", out_dir)->required();
  eval->add_option("--format", format)->check(CLI::IsMember({"json", "markdown", "csv"}));
  eval->add_option("--parallel", parallel)->check(CLI::PositiveNumber);

  // build
  auto* build = app.add_subcommand("build", "Build a dataset from raw records");
  std::string stage, in_path, rule_path, build_out;
  std::uint64_t build_seed = 0;
  build->add_option("stage", stage)->required()->check(
      CLI::IsMember({"pairs", "labeled", "pair-task", "retrieval-task"}));
  build->add_option("--in", in_path)->required();
  build->add_option("--rule", rule_path)->required();
  build->add_option("--seed", build_seed);
  build->add_option("--out", build_out)->required();

  // dedup
  auto* dedup = app.add_subcommand("dedup", "Remove training pairs that overlap benchmark texts");
  std::string train_path, bench_dir, dedup_out;
  dedup->add_option("--train", train_path)->required();
  dedup->add_option("--benchmark", bench_dir)->required();
  dedup->add_option("--out", dedup_out)->required();

  // train-head
  auto* train = app.add_subcommand("train-head", "Train a contrastive projection head");
  std::string pairs_path, train_provider, config_path, ckpt_out;
  train->add_option("--pairs", pairs_path)->required();
  train->add_option("--provider", train_provider)->required();
  train->add_option("--config", config_path)->required();
  train->add_option("--out", ckpt_out)->required();

  // report
  auto* report = app.add_subcommand("report", "Render a saved report");
  std::string report_in, report_format = "markdown";
  report->add_option("--in", report_in)->required();
  report->add_option("--format", report_format)->check(CLI::IsMember({"json", "markdown", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  seed_given = seed_opt->count() > 0;

  try {
    if (eval->parsed()) {
      BenchmarkManifest m = load_manifest(manifest_path);
      if (seed_given) m.master_seed = seed;
      const ProviderSpec spec = load_provider_spec(provider_path);
      RunOptions opt;
      opt.parallel = parallel;
      const BenchmarkReport r = run_benchmark(m, spec, opt);
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", render_report(r, ReportFormat::json));
      const ReportFormat f = parse_report_format(format);
      if (f != ReportFormat::json)
        write_file(fs::path(out_dir) / (std::string("report.") + extension_for(f)), render_report(r, f));
      std::cout << render_report(r, ReportFormat::markdown);
    } else if (build->parsed()) {
      const std::size_t n = run_build(parse_build_kind(stage), in_path, rule_path, build_seed, build_out);
      std::cout << stage << ": wrote " << n << " records to " << build_out << "\n";
    } else if (dedup->parsed()) {
      const std::size_t removed = run_dedup(train_path, bench_dir, dedup_out);
      std::cout << "dedup: removed " << removed << " pairs\n";
    } else if (train->parsed()) {
      const TrainResult r = run_train_head(pairs_path, train_provider, config_path, ckpt_out);
      std::cout << "train-head: " << r.state.step << " steps, final loss " << r.log.back().train_loss
                << ", checkpoint " << ckpt_out << ", log " << loss_csv_path(ckpt_out).string() << "\n";
    } else if (report->parsed()) {
      const BenchmarkReport r = parse_report_json(read_file(report_in));
      std::cout << render_report(r, parse_report_format(report_format));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
