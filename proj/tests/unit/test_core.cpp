#include <doctest.h>

#include <fstream>
#include <set>

#include "../support/fixtures.hpp"
#include "medteb/dataset.hpp"
#include "medteb/error.hpp"
#include "medteb/manifest.hpp"
#include "medteb/rng.hpp"
#include "medteb/text.hpp"

using namespace medteb;
namespace fs = std::filesystem;

TEST_CASE("preprocess_text") {
  CHECK(preprocess_text("  Chest   PAIN\t\nradiating  ") == "chest pain radiating");
  CHECK(preprocess_text("") == "");
  // decomposed e + combining acute becomes the precomposed form
  CHECK(preprocess_text("Caf\x65\xcc\x81") == "caf\xc3\xa9");
  CHECK(nfc("\x65\xcc\x81") == "\xc3\xa9");
  // non-breaking space counts as whitespace
  CHECK(preprocess_text("a\xc2\xa0\xc2\xa0" "B") == "a b");
}

TEST_CASE("rng is reproducible and seeds are task-local") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(derive_seed(1, "task-a") == derive_seed(1, "task-a"));
  CHECK(derive_seed(1, "task-a") != derive_seed(1, "task-b"));
  CHECK(derive_seed(1, "task-a") != derive_seed(2, "task-a"));
  // FNV-1a reference values
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

  Rng r(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) ++counts[r.index(7)];
  for (int c : counts) CHECK(c > 800);
  double mean = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double z = r.normal();
    mean += z;
    sq += z * z;
  }
  CHECK(std::abs(mean / 20000) < 0.03);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("labeled dataset loading") {
  const auto dir = fixtures::temp_dir("core");
  fixtures::write_text(dir / "ok.jsonl",
                       "{\"id\":\"x1\",\"text\":\"heart attack\",\"label\":\"cardiology\",\"split\":\"train\"}\n"
                       "\n"
                       "{\"id\":\"x2\",\"text\":\"lung mass\",\"label\":\"oncology\",\"split\":\"test\"}\n");
  const auto d = load_labeled(dir / "ok.jsonl");
  REQUIRE(d.items.size() == 2);
  CHECK(d.items[1].label == "oncology");
  CHECK(d.items[1].split == Split::test);

  fixtures::write_text(dir / "dup.jsonl",
                       "{\"id\":\"x1\",\"text\":\"a\",\"label\":\"l\",\"split\":\"train\"}\n"
                       "{\"id\":\"x1\",\"text\":\"b\",\"label\":\"l\",\"split\":\"train\"}\n");
  try {
    load_labeled(dir / "dup.jsonl");
    FAIL("expected duplicate id error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("\"x1\"") != std::string::npos);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  fixtures::write_text(dir / "bad.jsonl", "{\"id\":\"x1\",\"text\":\"a\",\"label\":\"l\",\"split\":\"train\"}\n{oops\n");
  try {
    load_labeled(dir / "bad.jsonl");
    FAIL("expected malformed line error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  fixtures::write_text(dir / "split.jsonl", "{\"id\":\"x1\",\"text\":\"a\",\"label\":\"l\",\"split\":\"dev\"}\n");
  CHECK_THROWS_AS(load_labeled(dir / "split.jsonl"), ValidationError);
  fixtures::write_text(dir / "shape.jsonl", "{\"id\":\"x1\",\"sent1\":\"a\",\"sent2\":\"b\",\"label\":1,\"split\":\"train\"}\n");
  CHECK_THROWS_AS(load_labeled(dir / "shape.jsonl"), ValidationError);
  CHECK_THROWS_AS(load_pairs(dir / "ok.jsonl"), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("retrieval dataset loading") {
  const auto dir = fixtures::temp_dir("ret");
  fixtures::write_text(dir / "corpus.jsonl",
                       "{\"_id\":\"d1\",\"text\":\"one\"}\n{\"_id\":\"d2\",\"text\":\"two\"}\n{\"_id\":\"d3\",\"text\":\"three\"}\n");
  fixtures::write_text(dir / "queries.jsonl", "{\"_id\":\"q1\",\"text\":\"uno\"}\n{\"_id\":\"q2\",\"text\":\"dos\"}\n");
  fixtures::write_text(dir / "qrels.tsv", "query-id\tcorpus-id\tscore\nq1\td1\t1\nq2\td2\t1\n");
  const auto d = load_retrieval(dir);
  // counts from an independent line count of the fixture files
  auto lines = [](const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string l;
    while (std::getline(in, l)) n += !l.empty();
    return n;
  };
  CHECK(d.corpus.size() == lines(dir / "corpus.jsonl"));
  CHECK(d.queries.size() == lines(dir / "queries.jsonl"));
  CHECK(d.qrels.size() == lines(dir / "qrels.tsv") - 1);

  fixtures::write_text(dir / "qrels.tsv", "q1\td9\t1\n");
  CHECK_THROWS_AS(load_retrieval(dir), ValidationError);

  RetrievalDataset copy = d;
  save_retrieval(d, dir / "copy");
  CHECK(load_retrieval(dir / "copy") == copy);
  fs::remove_all(dir);
}

TEST_CASE("split_view") {
  LabeledTextDataset d;
  for (int i = 0; i < 5; ++i) d.items.push_back({"i" + std::to_string(i), "t", "l", i < 3 ? Split::train : Split::test});
  CHECK(split_view(d, Split::test).items.size() == 2);
  CHECK(split_view(d, Split::validation).items.empty());
  CHECK(split_view(split_view(d, Split::train), Split::train) == split_view(d, Split::train));
}

TEST_CASE("round trips for labeled and pair datasets") {
  const auto dir = fixtures::temp_dir("rt");
  LabeledTextDataset l{{{"a", "x", "y", Split::validation}}, ""};
  save_labeled(l, dir / "l.jsonl");
  CHECK(load_labeled(dir / "l.jsonl") == l);
  PairDataset p{{{"a", "x", "y", 1, Split::test}, {"b", "x", "z", 0, Split::train}}, ""};
  save_pairs(p, dir / "p.jsonl");
  CHECK(load_pairs(dir / "p.jsonl") == p);
  fs::remove_all(dir);
}

TEST_CASE("manifest validation") {
  const auto dir = fixtures::temp_dir("manifest");
  const auto path = fixtures::write_medteb_shaped_manifest(dir);
  const auto m = load_manifest(path);
  const auto summary = validate_manifest(m);
  CHECK(summary.by_category.at(Category::classification) == 15);
  CHECK(summary.by_category.at(Category::clustering) == 12);
  CHECK(summary.by_category.at(Category::pair_classification) == 12);
  CHECK(summary.by_category.at(Category::retrieval) == 12);
  CHECK(summary.total == 51);
  CHECK(m.master_seed == 42);

  fixtures::write_text(dir / "empty.toml", "name = \"x\"\n");
  CHECK_THROWS_AS(validate_manifest(load_manifest(dir / "empty.toml")), ValidationError);

  const std::string task = "category = \"classification\"\nsource = \"pubmed\"\npath = \"labeled.jsonl\"\n";
  fixtures::write_text(dir / "dup.toml", "[[tasks]]\ntask_id = \"t\"\n" + task + "[[tasks]]\ntask_id = \"t\"\n" + task);
  CHECK_THROWS_AS(validate_manifest(load_manifest(dir / "dup.toml")), ValidationError);

  fixtures::write_text(dir / "dangling.toml",
                       "[[tasks]]\ntask_id = \"t\"\ncategory = \"retrieval\"\nsource = \"s\"\npath = \"nowhere\"\n");
  CHECK_THROWS_AS(validate_manifest(load_manifest(dir / "dangling.toml")), ValidationError);

  fixtures::write_text(dir / "shape.toml",
                       "[[tasks]]\ntask_id = \"t\"\ncategory = \"pair_classification\"\nsource = \"s\"\npath = \"labeled.jsonl\"\n");
  CHECK_THROWS_AS(validate_manifest(load_manifest(dir / "shape.toml")), ValidationError);

  fixtures::write_text(dir / "four.toml",
                       "[[tasks]]\ntask_id = \"a\"\ncategory = \"classification\"\nsource = \"s\"\npath = \"labeled.jsonl\"\n"
                       "[[tasks]]\ntask_id = \"b\"\ncategory = \"clustering\"\nsource = \"s\"\npath = \"labeled.jsonl\"\n"
                       "[[tasks]]\ntask_id = \"c\"\ncategory = \"pair_classification\"\nsource = \"s\"\npath = \"pairs.jsonl\"\n"
                       "[[tasks]]\ntask_id = \"d\"\ncategory = \"retrieval\"\nsource = \"s\"\npath = \"retrieval\"\n");
  const auto four = validate_manifest(load_manifest(dir / "four.toml"));
  for (Category c : kAllCategories) CHECK(four.by_category.at(c) == 1);
  CHECK(four.total == 4);
  fs::remove_all(dir);
}
