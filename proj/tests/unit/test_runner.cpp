#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "../support/fixtures.hpp"
#include "medteb/error.hpp"
#include "medteb/runner.hpp"

using namespace medteb;
namespace fs = std::filesystem;

namespace {

TaskScore ts(std::string id, Category c, std::string source, double score) {
  TaskScore t;
  t.task_id = std::move(id);
  t.category = c;
  t.source = std::move(source);
  t.score = score;
  return t;
}

std::vector<TaskScore> four(double cls, double clu, double pair, double ret) {
  return {ts("a", Category::classification, "pubmed", cls), ts("b", Category::clustering, "pubmed", clu),
          ts("c", Category::pair_classification, "medqa", pair), ts("d", Category::retrieval, "medqa", ret)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MEDTEB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("aggregation reproduces reference per-model averages") {
  CHECK(std::abs(aggregate(four(0.72, 0.38, 0.74, 0.45)).avg_type - 0.569) <= 0.005);
  CHECK(std::abs(aggregate(four(0.70, 0.28, 0.69, 0.41)).avg_type - 0.518) <= 0.005);
  CHECK(std::abs(aggregate(four(0.69, 0.28, 0.67, 0.38)).avg_type - 0.505) <= 0.005);
}

TEST_CASE("aggregation by hand") {
  const std::vector<TaskScore> one{ts("x", Category::retrieval, "pubmed", 0.4)};
  const auto a1 = aggregate(one);
  CHECK(a1.avg_type == 0.4);
  CHECK(a1.avg_all == 0.4);
  CHECK(a1.per_category.at(Category::retrieval).std == 0.0);

  const std::vector<TaskScore> eight{
      ts("c1", Category::classification, "pubmed", 0.2), ts("c2", Category::classification, "pmc", 0.4),
      ts("c3", Category::classification, "pubmed", 0.9), ts("k1", Category::clustering, "pmc", 0.5),
      ts("p1", Category::pair_classification, "medqa", 0.6), ts("p2", Category::pair_classification, "medqa", 0.8),
      ts("r1", Category::retrieval, "pubmed", 0.1), ts("r2", Category::retrieval, "medqa", 0.3)};
  const auto a = aggregate(eight);
  const double cls_mean = 0.5, clu_mean = 0.5, pair_mean = 0.7, ret_mean = 0.2;
  CHECK(a.per_category.at(Category::classification).mean == doctest::Approx(cls_mean));
  CHECK(a.per_category.at(Category::classification).std ==
        doctest::Approx(std::sqrt((0.09 + 0.01 + 0.16) / 3)));
  CHECK(a.per_category.at(Category::classification).count == 3);
  CHECK(a.avg_type == doctest::Approx((cls_mean + clu_mean + pair_mean + ret_mean) / 4));
  CHECK(a.avg_all == doctest::Approx(3.8 / 8));
  CHECK(a.per_source.at("pubmed") == doctest::Approx((0.2 + 0.9 + 0.1) / 3));
  CHECK(a.per_source.at("pmc") == doctest::Approx(0.45));
  CHECK(a.per_source.at("medqa") == doctest::Approx((0.6 + 0.8 + 0.3) / 3));
  CHECK_THROWS_AS(aggregate(std::vector<TaskScore>{}), ValidationError);
}

TEST_CASE("run_benchmark on the one-hot benchmark") {
  const auto dir = fixtures::temp_dir("runner");
  const auto manifest = load_manifest(fixtures::write_onehot_benchmark(dir));
  const auto spec = load_provider_spec(dir / "provider.toml");
  const auto r = run_benchmark(manifest, spec);
  REQUIRE(r.per_task.size() == 4);
  for (const auto& t : r.per_task) CHECK(t.score == doctest::Approx(1.0));
  CHECK(r.summary.avg_type == doctest::Approx(1.0));
  CHECK(r.summary.avg_all == doctest::Approx(1.0));
  CHECK(r.model_name == "oracle");
  fs::remove_all(dir);
}

TEST_CASE("reports are deterministic and round trip") {
  const auto dir = fixtures::temp_dir("runner-det");
  const auto manifest = load_manifest(fixtures::write_hash_benchmark(dir));
  const auto spec = load_provider_spec(dir / "provider.toml");
  const auto seq = run_benchmark(manifest, spec);
  RunOptions par;
  par.parallel = 4;
  const auto p4 = run_benchmark(manifest, spec, par);
  CHECK(render_report(seq, ReportFormat::json, false) == render_report(p4, ReportFormat::json, false));
  CHECK(render_report(seq, ReportFormat::json, false) == render_report(run_benchmark(manifest, spec), ReportFormat::json, false));

  const auto back = parse_report_json(render_report(seq, ReportFormat::json));
  CHECK(back == seq);

  const auto md = render_report(seq, ReportFormat::markdown);
  const auto first = md.substr(0, md.find('\n'));
  CHECK(std::count(first.begin(), first.end(), '|') == 9);
  CHECK(first.find("AvgType") != std::string::npos);

  const auto csv = render_report(seq, ReportFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(seq.per_task.size() + 1));
  CHECK(csv.rfind("model,task_id,category,source,score", 0) == 0);

  CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
  CHECK(parse_report_format("md") == ReportFormat::markdown);
  fs::remove_all(dir);
}

TEST_CASE("a failing task is named") {
  const auto dir = fixtures::temp_dir("runner-fail");
  fixtures::write_hash_benchmark(dir);
  const auto manifest = load_manifest(dir / "manifest.toml");
  // empty the retrieval qrels so evaluation cannot proceed
  fixtures::write_text(dir / "ret" / "qrels.tsv", "query-id\tcorpus-id\tscore\n");
  HashProvider h(16, 1);
  try {
    run_benchmark(manifest, h);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ret") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
  const auto dir = fixtures::temp_dir("cli");
  fixtures::write_onehot_benchmark(dir);
  const auto m = (dir / "manifest.toml").string(), p = (dir / "provider.toml").string();
  CHECK(run_cli("eval --manifest " + m + " --provider " + p + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(j["avg_all"].get<double>() == doctest::Approx(1.0));
  CHECK(run_cli("report --in " + (dir / "out" / "report.json").string() + " --format csv") == 0);
  CHECK(run_cli("eval --manifest " + m) == 2);
  CHECK(run_cli("eval --manifest " + (dir / "nope.toml").string() + " --provider " + p + " --out " +
                (dir / "o2").string()) == 2);
  fixtures::write_text(dir / "http.toml", "kind = \"http\"\nurl = \"http://127.0.0.1:1\"\nattempts = 1\n");
  CHECK(run_cli("eval --manifest " + m + " --provider " + (dir / "http.toml").string() + " --out " +
                (dir / "o3").string()) == 3);
  fs::remove_all(dir);
}
