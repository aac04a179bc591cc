// Synthetic datasets shared by the tests.
#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "medteb/dataset.hpp"
#include "medteb/manifest.hpp"
#include "medteb/providers.hpp"
#include "medteb/rng.hpp"
#include "medteb/trainer.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace medteb;

inline fs::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("medteb-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

// Text -> vector table that grows one one-hot slot per registered group.
struct OneHotTable {
  std::size_t dim;
  std::vector<std::string> texts;
  std::vector<Vector> vectors;
  std::size_t next_slot = 0;

  explicit OneHotTable(std::size_t d) : dim(d) {}
  std::size_t new_slot() {
    if (next_slot >= dim) throw std::runtime_error("one-hot table full");
    return next_slot++;
  }
  void add(const std::string& text, std::size_t slot) {
    Vector v(dim, 0.0);
    v[slot] = 1.0;
    texts.push_back(text);
    vectors.push_back(std::move(v));
  }
  EmbeddingMatrix matrix() const { return EmbeddingMatrix::from_rows(vectors); }
};

// Writes a 4-task benchmark (one per category) and a file store that embeds
// every text so the ideal answer is always recoverable. Returns the manifest path.
inline fs::path write_onehot_benchmark(const fs::path& dir, std::uint64_t master_seed = 7) {
  OneHotTable table(128);

  LabeledTextDataset cls{{}, "pubmed"};
  const char* labels[] = {"cardiology", "oncology", "neurology"};
  for (int l = 0; l < 3; ++l) {
    const auto slot = table.new_slot();
    for (int i = 0; i < 10; ++i) {
      const std::string text = std::string(labels[l]) + " abstract " + std::to_string(i);
      table.add(text, slot);
      cls.items.push_back({"c" + std::to_string(l) + "-" + std::to_string(i), text, labels[l],
                           i < 6 ? Split::train : (i < 8 ? Split::validation : Split::test)});
    }
  }
  save_labeled(cls, dir / "cls.jsonl");

  LabeledTextDataset clu{{}, "clinicaltrials"};
  const char* topics[] = {"diabetes", "asthma", "sepsis", "stroke"};
  for (int l = 0; l < 4; ++l) {
    const auto slot = table.new_slot();
    for (int i = 0; i < 8; ++i) {
      const std::string text = std::string(topics[l]) + " trial " + std::to_string(i);
      table.add(text, slot);
      clu.items.push_back({"k" + std::to_string(l) + "-" + std::to_string(i), text, topics[l], Split::test});
    }
  }
  save_labeled(clu, dir / "clu.jsonl");

  PairDataset pairs{{}, "medqa"};
  for (int i = 0; i < 12; ++i) {
    const auto slot = table.new_slot();
    const std::string s = "sentence " + std::to_string(i), p = "paraphrase of sentence " + std::to_string(i);
    table.add(s, slot);
    table.add(p, slot);
  }
  for (int i = 0; i < 12; ++i) {
    const Split sp = i < 8 ? Split::train : Split::test;
    pairs.items.push_back({"pos-" + std::to_string(i), "sentence " + std::to_string(i),
                           "paraphrase of sentence " + std::to_string(i), 1, sp});
    pairs.items.push_back({"neg-" + std::to_string(i), "sentence " + std::to_string(i),
                           "paraphrase of sentence " + std::to_string((i + 1) % 12), 0, sp});
  }
  save_pairs(pairs, dir / "pairs.jsonl");

  RetrievalDataset ret;
  ret.source = "trec-covid";
  for (int i = 0; i < 20; ++i) {
    const auto slot = table.new_slot();
    const std::string d = "document " + std::to_string(i), q = "query " + std::to_string(i);
    table.add(d, slot);
    table.add(q, slot);
    ret.corpus.push_back({"d" + std::to_string(i), d});
    if (i < 15) {
      ret.queries.push_back({"q" + std::to_string(i), q});
      ret.qrels.push_back({"q" + std::to_string(i), "d" + std::to_string(i), 1});
    }
  }
  save_retrieval(ret, dir / "ret");

  save_file_store(dir / "store.jsonl", table.dim, table.texts, table.matrix());
  write_text(dir / "provider.toml", "kind = \"file_store\"\nname = \"oracle\"\npath = \"store.jsonl\"\n");
  write_text(dir / "manifest.toml",
             "name = \"onehot\"\nmaster_seed = " + std::to_string(master_seed) +
                 "\n"
                 "[[tasks]]\ntask_id = \"cls\"\ncategory = \"classification\"\nsource = \"pubmed\"\npath = \"cls.jsonl\"\n"
                 "[[tasks]]\ntask_id = \"clu\"\ncategory = \"clustering\"\nsource = \"clinicaltrials\"\npath = \"clu.jsonl\"\n"
                 "[[tasks]]\ntask_id = \"pair\"\ncategory = \"pair_classification\"\nsource = \"medqa\"\npath = \"pairs.jsonl\"\n"
                 "[[tasks]]\ntask_id = \"ret\"\ncategory = \"retrieval\"\nsource = \"trec-covid\"\npath = \"ret\"\n");
  return dir / "manifest.toml";
}

// A benchmark whose scores are not trivially 1, evaluated with the hash
// provider. Used for determinism checks.
inline fs::path write_hash_benchmark(const fs::path& dir, std::uint64_t master_seed = 11) {
  Rng rng(99);
  std::string manifest = "name = \"hashbench\"\nmaster_seed = " + std::to_string(master_seed) + "\n";
  const char* words[] = {"fever", "cough", "renal", "cardiac", "tumor", "insulin", "lesion", "biopsy", "sepsis", "rash"};
  auto sentence = [&](int len) {
    std::string s;
    for (int w = 0; w < len; ++w) s += std::string(w ? " " : "") + words[rng.index(10)] + std::to_string(rng.index(50));
    return s;
  };
  for (int t = 0; t < 2; ++t) {
    LabeledTextDataset d{{}, t ? "medrxiv" : "pubmed"};
    for (int i = 0; i < 60; ++i)
      d.items.push_back({"i" + std::to_string(i), sentence(5), "L" + std::to_string(i % 3),
                         i < 40 ? Split::train : Split::test});
    save_labeled(d, dir / ("cls" + std::to_string(t) + ".jsonl"));
    manifest += "[[tasks]]\ntask_id = \"cls" + std::to_string(t) + "\"\ncategory = \"classification\"\nsource = \"" +
                d.source + "\"\npath = \"cls" + std::to_string(t) + ".jsonl\"\n";
    save_labeled(d, dir / ("clu" + std::to_string(t) + ".jsonl"));
    manifest += "[[tasks]]\ntask_id = \"clu" + std::to_string(t) + "\"\ncategory = \"clustering\"\nsource = \"" +
                d.source + "\"\npath = \"clu" + std::to_string(t) + ".jsonl\"\n";
  }
  PairDataset p{{}, "medqa"};
  for (int i = 0; i < 40; ++i)
    p.items.push_back({"p" + std::to_string(i), sentence(4), sentence(4), i % 2, i < 24 ? Split::train : Split::test});
  save_pairs(p, dir / "pairs.jsonl");
  manifest += "[[tasks]]\ntask_id = \"pair\"\ncategory = \"pair_classification\"\nsource = \"medqa\"\npath = \"pairs.jsonl\"\n";
  RetrievalDataset r;
  r.source = "nfcorpus";
  for (int i = 0; i < 30; ++i) r.corpus.push_back({"d" + std::to_string(i), sentence(6)});
  for (int i = 0; i < 10; ++i) {
    r.queries.push_back({"q" + std::to_string(i), sentence(3)});
    r.qrels.push_back({"q" + std::to_string(i), "d" + std::to_string(rng.index(30)), 1});
  }
  save_retrieval(r, dir / "ret");
  manifest += "[[tasks]]\ntask_id = \"ret\"\ncategory = \"retrieval\"\nsource = \"nfcorpus\"\npath = \"ret\"\n";
  write_text(dir / "manifest.toml", manifest);
  write_text(dir / "provider.toml", "kind = \"hash_baseline\"\nname = \"hash-64\"\ndim = 64\nseed = 5\n");
  return dir / "manifest.toml";
}

// 51-task manifest with the benchmark's category totals (15/12/12/12) and
// source coverage; every task points at a tiny dataset of the right shape.
inline fs::path write_medteb_shaped_manifest(const fs::path& dir) {
  struct Row {
    Category category;
    int total;
    std::vector<std::string> sources;
  };
  const std::vector<Row> rows = {
      {Category::classification, 15, {"mimic-iv", "pmc", "pubmed", "wikipedia"}},
      {Category::clustering, 12, {"mimic-iv", "pmc", "wikipedia"}},
      {Category::pair_classification, 12, {"mimic-iv", "medqa", "medmcqa", "medrxiv"}},
      {Category::retrieval, 12, {"mimic-iv", "pubmed", "wikipedia", "medqa", "medmcqa", "medquad", "medrxiv", "biorxiv"}},
  };
  LabeledTextDataset lab{{{"a", "text a", "x", Split::train}, {"b", "text b", "y", Split::test}}, ""};
  PairDataset pair{{{"p", "one", "two", 1, Split::train}, {"n", "one", "three", 0, Split::test}}, ""};
  RetrievalDataset ret{{{"q", "query"}}, {{"d", "doc"}, {"e", "other"}}, {{"q", "d", 1}}, ""};
  save_labeled(lab, dir / "labeled.jsonl");
  save_pairs(pair, dir / "pairs.jsonl");
  save_retrieval(ret, dir / "retrieval");
  std::string m = "name = \"medteb-shaped\"\nmaster_seed = 42\n";
  for (const auto& r : rows) {
    for (int i = 0; i < r.total; ++i) {
      const std::string& src = r.sources[static_cast<std::size_t>(i) % r.sources.size()];
      const char* path = r.category == Category::pair_classification ? "pairs.jsonl"
                         : r.category == Category::retrieval         ? "retrieval"
                                                                      : "labeled.jsonl";
      m += "[[tasks]]\ntask_id = \"" + std::string(to_string(r.category)) + "-" + src + "-" + std::to_string(i) +
           "\"\ncategory = \"" + std::string(to_string(r.category)) + "\"\nsource = \"" + src + "\"\npath = \"" +
           path + "\"\n";
    }
  }
  write_text(dir / "manifest.toml", m);
  return dir / "manifest.toml";
}

// Desk-scale contrastive corpus: an 8-dim shared signal plus 24 per-text
// nuisance dimensions, mixed by a fixed random rotation into 32 dims.
// Positives carry the anchor's signal plus N(0, sigma^2) noise.
struct SyntheticPairs {
  PositivePairCorpus corpus;
  std::unordered_map<std::string, Vector> vectors;
};

inline std::vector<double> random_rotation(std::size_t d, Rng& rng) {
  std::vector<double> q(d * d);
  for (auto& x : q) x = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {  // Gram-Schmidt on rows
    for (std::size_t j = 0; j < i; ++j) {
      double proj = 0;
      for (std::size_t k = 0; k < d; ++k) proj += q[i * d + k] * q[j * d + k];
      for (std::size_t k = 0; k < d; ++k) q[i * d + k] -= proj * q[j * d + k];
    }
    double norm = 0;
    for (std::size_t k = 0; k < d; ++k) norm += q[i * d + k] * q[i * d + k];
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < d; ++k) q[i * d + k] /= norm;
  }
  return q;
}

inline SyntheticPairs synthetic_pairs(std::size_t n, std::uint64_t seed, const std::string& prefix,
                                      double sigma = 0.1, std::size_t signal_dims = 8, std::size_t d = 32) {
  Rng rot_rng(12345);  // the mixing is shared by every split
  const auto q = random_rotation(d, rot_rng);
  Rng rng(seed);
  SyntheticPairs out;
  auto mix = [&](const Vector& z) {
    Vector x(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) x[i] += q[k * d + i] * z[k];
    return x;
  };
  const std::string sources[] = {"pubmed", "medqa", "mimic-iv"};
  for (std::size_t i = 0; i < n; ++i) {
    Vector signal(signal_dims);
    for (auto& s : signal) s = rng.normal();
    Vector za(d), zp(d);
    for (std::size_t k = 0; k < signal_dims; ++k) {
      za[k] = signal[k];
      zp[k] = signal[k] + sigma * rng.normal();
    }
    for (std::size_t k = signal_dims; k < d; ++k) {
      za[k] = rng.normal();
      zp[k] = rng.normal();
    }
    const std::string a = prefix + "anchor " + std::to_string(i), p = prefix + "positive " + std::to_string(i);
    out.vectors.emplace(a, mix(za));
    out.vectors.emplace(p, mix(zp));
    out.corpus.push_back({a, p, sources[i % 3]});
  }
  return out;
}

}  // namespace fixtures
