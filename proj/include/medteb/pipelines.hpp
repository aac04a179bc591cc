#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "medteb/builder.hpp"
#include "medteb/trainer.hpp"

namespace medteb {

enum class BuildKind { pairs, labeled, pair_task, retrieval_task };
BuildKind parse_build_kind(std::string_view s);

// Runs one builder stage described by a TOML rule file and writes its dataset
// plus build_report.jsonl (skip/removal counters) into out_dir. Returns the
// number of records written.
//
// pairs:          defaults = true and/or [[rules]] {source, anchor_field,
//                 positive_field, transform = "identity"|"first_sentence"}
// labeled:        strategy, label_field, text_field, fractions, min_label_count, source?
// pair-task:      sentence_field, provider (spec file), k, fractions, paraphraser, source?
// retrieval-task: mode = "paraphrase"|"qa", sentence_field | question_field + answer_field,
//                 paraphraser, source?
// paraphraser:    "stub" (default, seeded) or "http" with paraphrase_url,
//                 max_in_flight, timeout_ms, attempts, backoff_ms, audit_log.
std::size_t run_build(BuildKind kind, const std::filesystem::path& in, const std::filesystem::path& rule,
                      std::uint64_t seed, const std::filesystem::path& out_dir);

// Returns the number of removed pairs; the report goes beside `out`.
std::size_t run_dedup(const std::filesystem::path& train, const std::filesystem::path& benchmark_dir,
                      const std::filesystem::path& out);

// Writes the checkpoint and <stem>.loss.csv next to it.
TrainResult run_train_head(const std::filesystem::path& pairs, const std::filesystem::path& provider_spec,
                           const std::filesystem::path& config, const std::filesystem::path& out);

std::filesystem::path loss_csv_path(const std::filesystem::path& checkpoint);

}  // namespace medteb
