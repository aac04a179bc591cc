#include "medteb/pipelines.hpp"

#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "toml_util.hpp"

namespace medteb {

namespace fs = std::filesystem;
using nlohmann::json;

BuildKind parse_build_kind(std::string_view s) {
  if (s == "pairs") return BuildKind::pairs;
  if (s == "labeled") return BuildKind::labeled;
  if (s == "pair-task") return BuildKind::pair_task;
  if (s == "retrieval-task") return BuildKind::retrieval_task;
  throw ValidationError("unknown build stage '" + std::string(s) + "'");
}

namespace {

class ReportWriter {
 public:
  ReportWriter(const fs::path& path, std::string stage) : out_(path), stage_(std::move(stage)) {
    if (!out_) throw ValidationError("cannot write " + path.string());
  }
  void add(const std::string& counter, std::size_t value, const std::string& source = {}) {
    json j = {{"stage", stage_}, {"counter", counter}, {"value", value}};
    if (!source.empty()) j["source"] = source;
    out_ << j.dump() << '\n';
  }

 private:
  std::ofstream out_;
  std::string stage_;
};

SplitFractions fractions_from(const toml::table& t) {
  const auto f = toml_doubles(t, "fractions", {0.8, 0.1, 0.1});
  if (f.size() != 3) throw ValidationError("\"fractions\" must have 3 entries");
  return {f[0], f[1], f[2]};
}

std::vector<RawRecord> filtered_records(const fs::path& in, const toml::table& t) {
  auto records = load_raw_records(in);
  if (const auto src = t["source"].value<std::string>()) {
    std::erase_if(records, [&](const RawRecord& r) { return r.source != *src; });
    if (records.empty()) throw ValidationError("no records with source '" + *src + "'");
  }
  return records;
}

std::unique_ptr<ParaphraseProvider> make_paraphraser(const toml::table& t, const fs::path& rule, std::uint64_t seed,
                                                     std::size_t& max_in_flight) {
  max_in_flight = static_cast<std::size_t>(toml_u64(t, "max_in_flight", 1));
  const std::string kind = t["paraphraser"].value_or(std::string("stub"));
  if (kind == "stub") return std::make_unique<StubParaphraser>(seed);
  if (kind != "http") throw ValidationError(rule.string() + ": unknown paraphraser '" + kind + "'");
  HttpParaphraserConfig c;
  c.url = t["paraphrase_url"].value_or(std::string());
  c.timeout = std::chrono::milliseconds(toml_u64(t, "timeout_ms", 60000));
  c.attempts = static_cast<int>(toml_u64(t, "attempts", 3));
  c.initial_backoff = std::chrono::milliseconds(toml_u64(t, "backoff_ms", 250));
  if (const auto a = t["audit_log"].value<std::string>())
    c.audit_log = fs::path(*a).is_absolute() ? fs::path(*a) : rule.parent_path() / *a;
  return std::make_unique<HttpParaphraser>(std::move(c));
}

std::vector<std::string> field_values(std::span<const RawRecord> records, const std::string& field,
                                      std::size_t& missing) {
  std::vector<std::string> out;
  missing = 0;
  for (const auto& r : records) {
    const auto it = r.fields.find(field);
    if (it == r.fields.end() || it->second.find_first_not_of(" \t\r\n") == std::string::npos) {
      ++missing;
      continue;
    }
    out.push_back(it->second);
  }
  return out;
}

PairTransform parse_transform(const std::string& s) {
  if (s == "identity") return PairTransform::identity;
  if (s == "first_sentence") return PairTransform::first_sentence;
  throw ValidationError("unknown transform '" + s + "'");
}

LabelStrategy parse_strategy(const std::string& s) {
  if (s == "author_keywords") return LabelStrategy::author_keywords;
  if (s == "parent_category") return LabelStrategy::parent_category;
  if (s == "search_term") return LabelStrategy::search_term;
  throw ValidationError("unknown label strategy '" + s + "'");
}

}  // namespace

std::size_t run_build(BuildKind kind, const fs::path& in, const fs::path& rule, std::uint64_t seed,
                      const fs::path& out_dir) {
  const toml::table t = parse_toml_file(rule);
  fs::create_directories(out_dir);

  switch (kind) {
    case BuildKind::pairs: {
      std::vector<PairingRule> rules;
      if (t["defaults"].value_or(false)) rules = default_pairing_rules();
      if (const toml::array* arr = t["rules"].as_array()) {
        for (const auto& node : *arr) {
          const toml::table* r = node.as_table();
          if (r == nullptr) throw ValidationError(rule.string() + ": [[rules]] entries must be tables");
          PairingRule pr{toml_required_string(*r, "source", rule), toml_required_string(*r, "anchor_field", rule),
                         toml_required_string(*r, "positive_field", rule),
                         parse_transform((*r)["transform"].value_or(std::string("identity")))};
          std::erase_if(rules, [&](const PairingRule& x) { return x.source == pr.source; });
          rules.push_back(std::move(pr));
        }
      }
      if (rules.empty()) throw ValidationError(rule.string() + ": no pairing rules");
      const auto records = load_raw_records(in);
      const auto built = build_pairs(records, rules);
      save_pairs_corpus(built.corpus, out_dir / "pairs.jsonl");
      ReportWriter rep(out_dir / "build_report.jsonl", "pairs");
      for (const auto& [src, c] : built.per_source) {
        rep.add("pairs", c.pairs, src);
        rep.add("skipped_missing", c.skipped_missing, src);
        rep.add("dropped_empty", c.dropped_empty, src);
      }
      rep.add("unmatched", built.unmatched);
      return built.corpus.size();
    }
    case BuildKind::labeled: {
      const auto records = filtered_records(in, t);
      LabelRule lr{parse_strategy(toml_required_string(t, "strategy", rule)),
                   toml_required_string(t, "label_field", rule)};
      const auto built = build_labeled_task(records, lr, toml_required_string(t, "text_field", rule),
                                            fractions_from(t), seed,
                                            static_cast<std::size_t>(toml_u64(t, "min_label_count", 2)));
      save_labeled(built.dataset, out_dir / "data.jsonl");
      ReportWriter rep(out_dir / "build_report.jsonl", "labeled");
      rep.add("items", built.dataset.items.size());
      rep.add("dropped_missing", built.dropped_missing);
      rep.add("dropped_rare", built.dropped_rare);
      rep.add("dropped_not_in_train", built.dropped_not_in_train);
      return built.dataset.items.size();
    }
    case BuildKind::pair_task: {
      const auto records = filtered_records(in, t);
      std::size_t missing = 0;
      const auto sentences = field_values(records, toml_required_string(t, "sentence_field", rule), missing);
      const fs::path spec_path = toml_required_string(t, "provider", rule);
      const auto spec = load_provider_spec(spec_path.is_absolute() ? spec_path : rule.parent_path() / spec_path);
      auto base = make_provider(spec);
      PairTaskOptions opt;
      opt.k = static_cast<std::size_t>(toml_u64(t, "k", 64));
      opt.fractions = fractions_from(t);
      auto para = make_paraphraser(t, rule, seed, opt.max_in_flight);
      auto built = build_pair_task(sentences, *base, *para, seed, opt);
      built.dataset.source = records.front().source;
      save_pairs(built.dataset, out_dir / "data.jsonl");
      ReportWriter rep(out_dir / "build_report.jsonl", "pair-task");
      rep.add("pairs", built.dataset.items.size());
      rep.add("skipped_missing", missing);
      rep.add("duplicates_removed", built.duplicates_removed);
      rep.add("paraphrase_failures", built.paraphrase_failures);
      return built.dataset.items.size();
    }
    case BuildKind::retrieval_task: {
      const auto records = filtered_records(in, t);
      const std::string mode = t["mode"].value_or(std::string("paraphrase"));
      RetrievalBuild built;
      std::size_t missing = 0;
      if (mode == "paraphrase") {
        const auto sentences = field_values(records, toml_required_string(t, "sentence_field", rule), missing);
        std::size_t in_flight = 1;
        auto para = make_paraphraser(t, rule, seed, in_flight);
        built = build_retrieval_task(sentences, *para, seed, in_flight);
      } else if (mode == "qa") {
        const std::string qf = toml_required_string(t, "question_field", rule);
        const std::string af = toml_required_string(t, "answer_field", rule);
        std::vector<std::pair<std::string, std::string>> qa;
        for (const auto& r : records) {
          const auto q = r.fields.find(qf);
          const auto a = r.fields.find(af);
          if (q == r.fields.end() || a == r.fields.end()) {
            ++missing;
            continue;
          }
          qa.emplace_back(q->second, a->second);
        }
        built = build_retrieval_task_qa(qa, seed);
      } else {
        throw ValidationError(rule.string() + ": unknown retrieval mode '" + mode + "'");
      }
      built.dataset.source = records.front().source;
      save_retrieval(built.dataset, out_dir);
      ReportWriter rep(out_dir / "build_report.jsonl", "retrieval-task");
      rep.add("documents", built.dataset.corpus.size());
      rep.add("queries", built.dataset.queries.size());
      rep.add("skipped_missing", missing);
      rep.add("paraphrase_failures", built.paraphrase_failures);
      return built.dataset.queries.size();
    }
  }
  throw ValidationError("unknown build stage");
}

std::size_t run_dedup(const fs::path& train, const fs::path& benchmark_dir, const fs::path& out) {
  const auto corpus = load_pairs_corpus(train);
  const auto result = deduplicate_overlap(corpus, collect_benchmark_texts(benchmark_dir));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_pairs_corpus(result.corpus, out);
  fs::path report = out;
  report.replace_extension(".report.jsonl");
  ReportWriter rep(report, "dedup");
  for (const auto& [src, n] : result.removed_per_source) rep.add("removed", n, src);
  rep.add("removed_total", result.removed);
  rep.add("kept", result.corpus.size());
  return result.removed;
}

fs::path loss_csv_path(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  p.replace_extension(".loss.csv");
  return p;
}

TrainResult run_train_head(const fs::path& pairs, const fs::path& provider_spec, const fs::path& config,
                           const fs::path& out) {
  const auto corpus = load_pairs_corpus(pairs);
  const auto spec = load_provider_spec(provider_spec);
  auto base = make_provider(spec);
  const TrainConfig cfg = load_train_config(config);
  TrainResult r = train_head(*base, corpus, cfg);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  TrainConfig echo = cfg;
  echo.d_in = r.state.d_in;
  echo.d_out = r.state.d_out;
  save_checkpoint({r.state, echo}, out);
  write_loss_csv(r.log, loss_csv_path(out));
  return r;
}

}  // namespace medteb
