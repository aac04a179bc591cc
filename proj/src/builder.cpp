#include "medteb/builder.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "medteb/metrics.hpp"
#include "medteb/rng.hpp"
#include "medteb/text.hpp"

namespace medteb {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<RawRecord> load_raw_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("source") || !j["source"].is_string() || !j.contains("fields") ||
        !j["fields"].is_object())
      throw ValidationError(where + ": expected {\"source\": str, \"fields\": {...}}");
    RawRecord r;
    r.source = j["source"].get<std::string>();
    for (const auto& [k, v] : j["fields"].items()) {
      if (!v.is_string()) throw ValidationError(where + ": field \"" + k + "\" is not a string");
      r.fields.emplace(k, nfc(v.get<std::string>()));
    }
    if (r.fields.empty()) throw ValidationError(where + ": empty field map");
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string first_sentence(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.empty()) throw ValidationError("first_sentence: empty text");
  const auto n = static_cast<std::int32_t>(t.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const char c = t[static_cast<std::size_t>(i)];
    if (c != '.' && c != '?' && c != '!') continue;
    std::int32_t j = i + 1;
    if (j == n) return std::string(t);
    if (!is_ascii_space(t[static_cast<std::size_t>(j)])) continue;
    while (j < n && is_ascii_space(t[static_cast<std::size_t>(j)])) ++j;
    if (j == n) return std::string(t.substr(0, static_cast<std::size_t>(i) + 1));
    UChar32 cp = 0;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(t.data()), j, n, cp);
    if (cp >= 0 && u_isupper(cp)) return std::string(t.substr(0, static_cast<std::size_t>(i) + 1));
  }
  return std::string(t);
}

std::vector<PairingRule> default_pairing_rules() {
  using T = PairTransform;
  return {
      {"pubmed", "title", "abstract", T::first_sentence},
      {"biorxiv", "title", "abstract", T::first_sentence},
      {"medrxiv", "title", "abstract", T::first_sentence},
      {"mimic-iv", "history_of_present_illness", "chief_complaint", T::identity},
      {"clinicaltrials", "title", "detailed_description", T::identity},
      {"medmcqa", "question", "explanation", T::identity},
      {"medqa", "question", "explanation", T::identity},
      {"medquad", "question", "answer", T::identity},
      {"trec-covid", "query", "passage", T::identity},
      {"nfcorpus", "query", "snippet", T::identity},
      {"cure-v1", "query", "evidence", T::identity},
  };
}

namespace {

void validate_rule(const PairingRule& r) {
  if (r.source.empty() || r.anchor_field.empty() || r.positive_field.empty())
    throw ValidationError("pairing rule: empty source or field name");
  if (r.anchor_field == r.positive_field)
    throw ValidationError("pairing rule for " + r.source + ": anchor and positive fields must differ");
}

}  // namespace

PairBuild build_pairs(std::span<const RawRecord> records, std::span<const PairingRule> rules) {
  std::map<std::string, const PairingRule*> by_source;
  for (const auto& r : rules) {
    validate_rule(r);
    if (!by_source.emplace(r.source, &r).second) throw ValidationError("duplicate pairing rule for " + r.source);
  }
  PairBuild out;
  for (const auto& rec : records) {
    const auto it = by_source.find(rec.source);
    if (it == by_source.end()) {
      ++out.unmatched;
      continue;
    }
    const PairingRule& rule = *it->second;
    auto& counts = out.per_source[rec.source];
    const auto a = rec.fields.find(rule.anchor_field);
    const auto p = rec.fields.find(rule.positive_field);
    if (a == rec.fields.end() || p == rec.fields.end()) {
      ++counts.skipped_missing;
      continue;
    }
    std::string anchor = preprocess_text(a->second);
    std::string positive;
    if (rule.transform == PairTransform::first_sentence) {
      if (trim(p->second).empty()) {
        ++counts.dropped_empty;
        continue;
      }
      positive = preprocess_text(first_sentence(p->second));
    } else {
      positive = preprocess_text(p->second);
    }
    if (anchor.empty() || positive.empty()) {
      ++counts.dropped_empty;
      continue;
    }
    out.corpus.push_back({std::move(anchor), std::move(positive), rec.source});
    ++counts.pairs;
  }
  if (out.corpus.empty()) throw ValidationError("build_pairs: no pairs produced");
  return out;
}

PairBuild build_pairs(std::span<const RawRecord> records, const PairingRule& rule) {
  return build_pairs(records, std::span<const PairingRule>(&rule, 1));
}

std::optional<std::string> extract_label(const RawRecord& record, const LabelRule& rule) {
  const auto it = record.fields.find(rule.field);
  if (it == record.fields.end()) return std::nullopt;
  std::string_view v = it->second;
  if (rule.strategy == LabelStrategy::author_keywords) {
    const auto cut = v.find_first_of(";,");
    if (cut != std::string_view::npos) v = v.substr(0, cut);
  }
  v = trim(v);
  if (v.empty()) return std::nullopt;
  return std::string(v);
}

namespace {

void validate_fractions(const SplitFractions& f) {
  if (!(f.train > 0.0) || !(f.validation > 0.0) || !(f.test > 0.0))
    throw ValidationError("split fractions must all be positive");
  if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
}

}  // namespace

std::vector<Split> assign_splits(std::size_t n, const SplitFractions& fractions, std::uint64_t seed) {
  validate_fractions(fractions);
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fractions.train * n)));
  const auto n_val =
      std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(fractions.validation * n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Split> out(n, Split::test);
  for (std::size_t r = 0; r < n; ++r) {
    out[order[r]] = r < n_train ? Split::train : (r < n_train + n_val ? Split::validation : Split::test);
  }
  return out;
}

LabeledBuild build_labeled_task(std::span<const RawRecord> records, const LabelRule& label_rule,
                                const std::string& text_field, const SplitFractions& fractions, std::uint64_t seed,
                                std::size_t min_label_count) {
  validate_fractions(fractions);
  LabeledBuild out;
  struct Candidate {
    std::size_t record;
    std::string text;
    std::string label;
  };
  std::vector<Candidate> cands;
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto t = rec.fields.find(text_field);
    auto label = extract_label(rec, label_rule);
    if (t == rec.fields.end() || trim(t->second).empty() || !label) {
      ++out.dropped_missing;
      continue;
    }
    ++counts[*label];
    cands.push_back({i, std::string(trim(t->second)), std::move(*label)});
  }
  std::vector<Candidate> kept;
  for (auto& c : cands) {
    if (counts[c.label] < std::max<std::size_t>(min_label_count, 1)) {
      ++out.dropped_rare;
      continue;
    }
    kept.push_back(std::move(c));
  }
  std::set<std::string> labels;
  for (const auto& c : kept) labels.insert(c.label);
  if (labels.size() < 2) throw ValidationError("build_labeled_task: fewer than 2 distinct labels");

  const auto splits = assign_splits(kept.size(), fractions, seed);
  std::set<std::string> in_train;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (splits[i] == Split::train) in_train.insert(kept[i].label);

  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!in_train.count(kept[i].label)) {
      ++out.dropped_not_in_train;
      continue;
    }
    const auto& rec = records[kept[i].record];
    out.dataset.items.push_back(
        {rec.source + "-" + std::to_string(kept[i].record), kept[i].text, kept[i].label, splits[i]});
  }
  if (in_train.size() < 2) throw ValidationError("build_labeled_task: fewer than 2 labels in the train split");
  out.dataset.source = records.empty() ? std::string() : records.front().source;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::unordered_map<std::string, std::string>& synonyms() {
  static const std::unordered_map<std::string, std::string> table = {
      {"patient", "individual"},    {"patients", "individuals"},   {"pain", "discomfort"},
      {"chest", "thoracic"},        {"heart", "cardiac"},          {"disease", "disorder"},
      {"doctor", "physician"},      {"medicine", "medication"},    {"drug", "medication"},
      {"treatment", "therapy"},     {"study", "investigation"},    {"results", "findings"},
      {"increase", "rise"},         {"decrease", "reduction"},     {"symptoms", "manifestations"},
      {"severe", "serious"},        {"acute", "sudden"},           {"chronic", "long-standing"},
      {"risk", "likelihood"},       {"infection", "infectious illness"}, {"test", "assay"},
      {"has", "presents with"},     {"shows", "demonstrates"},     {"use", "utilization"},
      {"children", "pediatric patients"}, {"elderly", "older adults"}, {"kidney", "renal"},
      {"lung", "pulmonary"},        {"liver", "hepatic"},          {"fever", "pyrexia"},
  };
  return table;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (is_ascii_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::string lower_ascii(std::string s) {
  for (auto& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

}  // namespace

std::string StubParaphraser::paraphrase(const std::string& sentence) {
  Rng rng(splitmix64(fnv1a64(sentence) ^ splitmix64(seed_)));
  auto words = split_words(sentence);
  const std::string original = join_words(words);
  bool changed = false;
  for (auto& w : words) {
    const auto it = synonyms().find(lower_ascii(w));
    if (it != synonyms().end() && rng.uniform() < 0.5) {
      w = it->second;
      changed = true;
    }
  }
  if (!changed && words.size() >= 2) {
    const std::size_t i = rng.index(words.size() - 1);
    std::swap(words[i], words[i + 1]);
  }
  std::string out = join_words(words);
  if (out == original || out == sentence) out = "regarding " + original;
  return out;
}

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : std::string();
}

}  // namespace

HttpParaphraser::HttpParaphraser(HttpParaphraserConfig config) : config_(std::move(config)) {
  while (!config_.url.empty() && config_.url.back() == '/') config_.url.pop_back();
  if (config_.url.empty()) throw ValidationError("paraphrase service: no url");
  if (config_.attempts < 1) throw ValidationError("paraphrase service: attempts must be >= 1");
  token_ = env_or_empty("PARAPHRASE_API_TOKEN");
}

void HttpParaphraser::record(AuditRow row) {
  std::lock_guard lock(mu_);
  if (!config_.audit_log.empty()) {
    std::ofstream log(config_.audit_log, std::ios::app);
    log << json{{"input", row.input}, {"output", row.output}, {"latency_ms", row.latency_ms}, {"ok", row.ok}}.dump()
        << '\n';
  }
  audit_.push_back(std::move(row));
}

std::vector<AuditRow> HttpParaphraser::audit() const {
  std::lock_guard lock(mu_);
  return audit_;
}

std::string HttpParaphraser::paraphrase(const std::string& sentence) {
  httplib::Client cli(config_.url);
  const auto secs = config_.timeout.count() / 1000;
  const auto usecs = (config_.timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  if (!token_.empty()) cli.set_bearer_token_auth(token_);

  const std::string body = json{{"text", sentence}}.dump();
  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt < config_.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post("/paraphrase", body, "application/json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      record({sentence, "", ms, false});
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      record({sentence, "", ms, false});
      if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) break;
      continue;
    }
    try {
      const auto j = json::parse(res->body);
      auto out = j.at("paraphrase").get<std::string>();
      if (trim(out).empty()) throw ProviderError("empty paraphrase");
      record({sentence, out, ms, true});
      return out;
    } catch (const json::exception& e) {
      last_error = std::string("bad response: ") + e.what();
      record({sentence, "", ms, false});
    }
  }
  throw ProviderError("paraphrase service " + config_.url + ": " + last_error);
}

std::string paraphrase(ParaphraseProvider& provider, const std::string& sentence) {
  if (trim(sentence).empty()) throw ValidationError("paraphrase: empty sentence");
  return provider.paraphrase(sentence);
}

ParaphraseResults paraphrase_all(ParaphraseProvider& provider, std::span<const std::string> sentences,
                                 std::size_t max_in_flight) {
  ParaphraseResults out;
  out.outputs.assign(sentences.size(), std::nullopt);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sentences.size(); i = next++) {
      try {
        out.outputs[i] = paraphrase(provider, sentences[i]);
      } catch (const ProviderError&) {
        ++failures;
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(sentences.size(), 1));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    for (std::size_t w = 0; w < n_workers; ++w) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }
  out.failures = failures.load();
  return out;
}

// ---------------------------------------------------------------------------

std::size_t mine_hard_negative(const EmbeddingMatrix& pool, std::size_t positive_index,
                               std::span<const std::size_t> excluded, std::size_t k, std::uint64_t seed) {
  const std::size_t n = pool.rows();
  if (n < 3) throw ValidationError("mine_hard_negative: pool needs at least 3 vectors");
  if (positive_index >= n) throw ValidationError("mine_hard_negative: positive index out of range");
  if (k == 0) throw ValidationError("mine_hard_negative: k must be positive");
  std::vector<char> skip(n, 0);
  skip[positive_index] = 1;
  for (auto e : excluded)
    if (e < n) skip[e] = 1;

  const auto p = pool.row(positive_index);
  std::vector<std::pair<double, std::size_t>> cands;
  for (std::size_t i = 0; i < n; ++i) {
    if (skip[i]) continue;
    cands.emplace_back(pair_score(pool.row(i), p, PairMetric::cosine), i);
  }
  if (cands.empty()) throw ValidationError("mine_hard_negative: no candidates left after exclusion");
  const std::size_t k_eff = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k_eff), cands.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  Rng rng(seed);
  return cands[rng.index(k_eff)].second;
}

std::size_t mine_hard_negative(const EmbeddingMatrix& pool, std::size_t positive_index,
                               std::optional<std::size_t> anchor_index, std::size_t k, std::uint64_t seed) {
  if (anchor_index) {
    if (*anchor_index == positive_index) throw ValidationError("mine_hard_negative: anchor equals positive");
    const std::size_t ex[] = {*anchor_index};
    return mine_hard_negative(pool, positive_index, std::span<const std::size_t>(ex), k, seed);
  }
  return mine_hard_negative(pool, positive_index, std::span<const std::size_t>(), k, seed);
}

const std::string& mine_hard_negative_id(const EmbeddingMatrix& pool, std::span<const std::string> pool_ids,
                                         std::size_t positive_index, std::optional<std::size_t> anchor_index,
                                         std::size_t k, std::uint64_t seed) {
  if (pool_ids.size() != pool.rows()) throw ValidationError("mine_hard_negative: ids/pool size mismatch");
  return pool_ids[mine_hard_negative(pool, positive_index, anchor_index, k, seed)];
}

namespace {

// NFC, trimmed, non-empty, first occurrence wins.
std::vector<std::string> unique_sentences(std::span<const std::string> sentences, std::size_t& removed) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  removed = 0;
  for (const auto& s : sentences) {
    std::string t(trim(nfc(s)));
    if (t.empty()) throw ValidationError("empty sentence in input");
    if (!seen.insert(t).second) {
      ++removed;
      continue;
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

PairTaskBuild build_pair_task(std::span<const std::string> sentences, EmbeddingProvider& base_provider,
                              ParaphraseProvider& paraphraser, std::uint64_t seed, const PairTaskOptions& options) {
  PairTaskBuild out;
  const auto uniq = unique_sentences(sentences, out.duplicates_removed);
  if (uniq.size() < 3) throw ValidationError("build_pair_task: need at least 3 distinct sentences");

  auto para = paraphrase_all(paraphraser, uniq, options.max_in_flight);
  out.paraphrase_failures = para.failures;
  std::vector<std::string> anchors, positives;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    if (!para.outputs[i]) continue;
    anchors.push_back(uniq[i]);
    positives.push_back(nfc(*para.outputs[i]));
  }
  if (anchors.size() < 3)
    throw ProviderError("build_pair_task: only " + std::to_string(anchors.size()) + " paraphrases succeeded");

  const EmbeddingMatrix pool = base_provider.embed(positives);
  const std::size_t n = anchors.size();
  const auto splits = assign_splits(n, options.fractions, seed);
  for (std::size_t i = 0; i < n; ++i) {
    // Texts identical to the anchor or the positive cannot serve as negatives.
    std::vector<std::size_t> excluded;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && (positives[j] == anchors[i] || positives[j] == positives[i])) excluded.push_back(j);
    const std::size_t neg = mine_hard_negative(pool, i, excluded, options.k, splitmix64(seed ^ (0x6e6567ULL + i)));
    out.dataset.items.push_back({"pos-" + std::to_string(i), anchors[i], positives[i], 1, splits[i]});
    out.dataset.items.push_back({"neg-" + std::to_string(i), anchors[i], positives[neg], 0, splits[i]});
  }
  return out;
}

RetrievalBuild build_retrieval_task(std::span<const std::string> sentences, ParaphraseProvider& paraphraser,
                                    std::uint64_t seed, std::size_t max_in_flight) {
  std::size_t dupes = 0;
  const auto uniq = unique_sentences(sentences, dupes);
  if (uniq.size() < 2) throw ValidationError("build_retrieval_task: need at least 2 distinct sentences");
  auto para = paraphrase_all(paraphraser, uniq, max_in_flight);

  RetrievalBuild out;
  out.paraphrase_failures = para.failures;
  std::vector<std::size_t> order(uniq.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t i : order) out.dataset.corpus.push_back({"d" + std::to_string(i), uniq[i]});
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    if (!para.outputs[i]) continue;  // the document stays as a distractor
    out.dataset.queries.push_back({"q" + std::to_string(i), nfc(*para.outputs[i])});
    out.dataset.qrels.push_back({"q" + std::to_string(i), "d" + std::to_string(i), 1});
  }
  if (out.dataset.queries.empty()) throw ProviderError("build_retrieval_task: every paraphrase call failed");
  return out;
}

RetrievalBuild build_retrieval_task_qa(std::span<const std::pair<std::string, std::string>> qa_pairs,
                                       std::uint64_t seed) {
  if (qa_pairs.size() < 2) throw ValidationError("build_retrieval_task: need at least 2 question/answer pairs");
  RetrievalBuild out;
  std::vector<std::size_t> order(qa_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t i : order) {
    const std::string doc(trim(nfc(qa_pairs[i].second)));
    if (doc.empty()) throw ValidationError("build_retrieval_task: empty answer");
    out.dataset.corpus.push_back({"d" + std::to_string(i), doc});
  }
  for (std::size_t i = 0; i < qa_pairs.size(); ++i) {
    const std::string q(trim(nfc(qa_pairs[i].first)));
    if (q.empty()) throw ValidationError("build_retrieval_task: empty question");
    out.dataset.queries.push_back({"q" + std::to_string(i), q});
    out.dataset.qrels.push_back({"q" + std::to_string(i), "d" + std::to_string(i), 1});
  }
  return out;
}

DedupResult deduplicate_overlap(const PositivePairCorpus& train_pairs, const std::set<std::string>& benchmark_texts) {
  std::unordered_set<std::string> bench;
  for (const auto& t : benchmark_texts) bench.insert(preprocess_text(t));
  DedupResult out;
  for (const auto& p : train_pairs) {
    if (bench.count(preprocess_text(p.anchor)) || bench.count(preprocess_text(p.positive))) {
      ++out.removed_per_source[p.source];
      ++out.removed;
      continue;
    }
    out.corpus.push_back(p);
  }
  return out;
}

std::set<std::string> collect_benchmark_texts(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::set<std::string> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw ValidationError(f.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      if (!j.is_object()) continue;
      for (const char* key : {"text", "sent1", "sent2"})
        if (j.contains(key) && j[key].is_string()) out.insert(j[key].get<std::string>());
    }
  }
  return out;
}

}  // namespace medteb
