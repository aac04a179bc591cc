#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medteb/dataset.hpp"
#include "medteb/matrix.hpp"
#include "medteb/providers.hpp"
#include "medteb/trainer.hpp"

namespace medteb {

struct RawRecord {
  std::string source;
  std::map<std::string, std::string> fields;
};

// JSONL, one {"source": str, "fields": {name: str, ...}} per line.
std::vector<RawRecord> load_raw_records(const std::filesystem::path& jsonl);

// Text up to and including the first '.', '?' or '!' that is followed by
// whitespace and an uppercase letter, or by the end of the text. Returns the
// whole (trimmed) text when no boundary exists. Throws on empty input.
std::string first_sentence(std::string_view text);

enum class PairTransform { identity, first_sentence };

struct PairingRule {
  std::string source;
  std::string anchor_field;
  std::string positive_field;
  PairTransform transform = PairTransform::identity;
};

// Pairing heuristics for the supported corpora (title <-> first abstract
// sentence for PubMed and preprint servers, HPI <-> chief complaint for
// MIMIC-IV, and so on).
std::vector<PairingRule> default_pairing_rules();

struct SourceCounts {
  std::size_t pairs = 0;
  std::size_t skipped_missing = 0;  // rule field absent from the record
  std::size_t dropped_empty = 0;    // a side was empty after preprocessing
};

struct PairBuild {
  PositivePairCorpus corpus;
  std::map<std::string, SourceCounts> per_source;
  std::size_t unmatched = 0;  // records whose source has no rule
};

// Applies the rule whose source matches each record. Both sides go through
// preprocess_text. Throws ValidationError when no pair results.
PairBuild build_pairs(std::span<const RawRecord> records, std::span<const PairingRule> rules);
PairBuild build_pairs(std::span<const RawRecord> records, const PairingRule& rule);

enum class LabelStrategy { author_keywords, parent_category, search_term };

struct LabelRule {
  LabelStrategy strategy = LabelStrategy::search_term;
  std::string field;
};

// author_keywords: first entry of a ';' or ',' separated list; the other
// strategies take the field value as is. Returns nullopt when absent or empty.
std::optional<std::string> extract_label(const RawRecord& record, const LabelRule& rule);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct LabeledBuild {
  LabeledTextDataset dataset;
  std::size_t dropped_missing = 0;       // no text or no label
  std::size_t dropped_rare = 0;          // label below min_label_count
  std::size_t dropped_not_in_train = 0;  // label absent from the train split
};

LabeledBuild build_labeled_task(std::span<const RawRecord> records, const LabelRule& label_rule,
                                const std::string& text_field, const SplitFractions& fractions, std::uint64_t seed,
                                std::size_t min_label_count = 2);

// Split tag for each of n shuffled items: the first round(train*n) go to
// train, the next round(validation*n) to validation, the rest to test.
std::vector<Split> assign_splits(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

class ParaphraseProvider {
 public:
  virtual ~ParaphraseProvider() = default;
  virtual std::string name() const = 0;
  // Throws ProviderError on failure.
  virtual std::string paraphrase(const std::string& sentence) = 0;
};

// Offline stand-in: seeded synonym substitution, falling back to an adjacent
// word swap, so the output always differs from the input.
class StubParaphraser final : public ParaphraseProvider {
 public:
  explicit StubParaphraser(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "stub"; }
  std::string paraphrase(const std::string& sentence) override;

 private:
  std::uint64_t seed_;
};

struct AuditRow {
  std::string input;
  std::string output;
  double latency_ms = 0.0;
  bool ok = true;
};

struct HttpParaphraserConfig {
  std::string url;
  std::chrono::milliseconds timeout{60000};
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::filesystem::path audit_log;  // JSONL; empty: in-memory only
};

// POST /paraphrase {"text": str} -> {"paraphrase": str}. Bearer token from
// $PARAPHRASE_API_TOKEN. Every call is recorded in the audit log.
class HttpParaphraser final : public ParaphraseProvider {
 public:
  explicit HttpParaphraser(HttpParaphraserConfig config);
  std::string name() const override { return "http:" + config_.url; }
  std::string paraphrase(const std::string& sentence) override;
  std::vector<AuditRow> audit() const;

 private:
  void record(AuditRow row);

  HttpParaphraserConfig config_;
  std::string token_;
  mutable std::mutex mu_;
  std::vector<AuditRow> audit_;
};

// Validates the input, then delegates.
std::string paraphrase(ParaphraseProvider& provider, const std::string& sentence);

struct ParaphraseResults {
  std::vector<std::optional<std::string>> outputs;  // by input index
  std::size_t failures = 0;
};

// Issues up to max_in_flight concurrent calls. Failed sentences are skipped and
// counted; results are keyed by input index.
ParaphraseResults paraphrase_all(ParaphraseProvider& provider, std::span<const std::string> sentences,
                                 std::size_t max_in_flight = 1);

// Samples one of the k nearest neighbours (cosine) of pool[positive_index],
// excluding the positive and every index in `excluded`. Ties in similarity are
// ordered by index.
std::size_t mine_hard_negative(const EmbeddingMatrix& pool, std::size_t positive_index,
                               std::span<const std::size_t> excluded, std::size_t k, std::uint64_t seed);
std::size_t mine_hard_negative(const EmbeddingMatrix& pool, std::size_t positive_index,
                               std::optional<std::size_t> anchor_index, std::size_t k, std::uint64_t seed);
const std::string& mine_hard_negative_id(const EmbeddingMatrix& pool, std::span<const std::string> pool_ids,
                                         std::size_t positive_index, std::optional<std::size_t> anchor_index,
                                         std::size_t k, std::uint64_t seed);

struct PairTaskOptions {
  std::size_t k = 64;
  SplitFractions fractions;
  std::size_t max_in_flight = 1;
};

struct PairTaskBuild {
  PairDataset dataset;
  std::size_t paraphrase_failures = 0;
  std::size_t duplicates_removed = 0;
};

// For every sentence s: (s, paraphrase(s), 1) and (s, mined paraphrase of
// another sentence, 0). The negative pool is the base-provider embedding of all
// paraphrases. Both pairs of a sentence share a split.
PairTaskBuild build_pair_task(std::span<const std::string> sentences, EmbeddingProvider& base_provider,
                              ParaphraseProvider& paraphraser, std::uint64_t seed, const PairTaskOptions& options = {});

struct RetrievalBuild {
  RetrievalDataset dataset;
  std::size_t paraphrase_failures = 0;
};

// Corpus = the sentences, queries = their paraphrases, one qrel per pair.
// The corpus order is shuffled with `seed`.
RetrievalBuild build_retrieval_task(std::span<const std::string> sentences, ParaphraseProvider& paraphraser,
                                    std::uint64_t seed, std::size_t max_in_flight = 1);
// QA mode: query = question, document = answer.
RetrievalBuild build_retrieval_task_qa(std::span<const std::pair<std::string, std::string>> qa_pairs,
                                       std::uint64_t seed);

struct DedupResult {
  PositivePairCorpus corpus;
  std::map<std::string, std::size_t> removed_per_source;
  std::size_t removed = 0;
};

// Drops every pair whose anchor or positive matches a benchmark text after
// preprocess_text on both sides.
DedupResult deduplicate_overlap(const PositivePairCorpus& train_pairs, const std::set<std::string>& benchmark_texts);

// Every "text", "sent1" and "sent2" value found in *.jsonl files under `dir`.
std::set<std::string> collect_benchmark_texts(const std::filesystem::path& dir);

}  // namespace medteb
