#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace medteb {

enum class Split { train, validation, test };

enum class Category { classification, clustering, pair_classification, retrieval };

std::string_view to_string(Split s);
std::string_view to_string(Category c);
Split parse_split(std::string_view s);
Category parse_category(std::string_view s);

// Table-column order used in reports.
inline constexpr Category kAllCategories[] = {Category::classification, Category::clustering,
                                              Category::pair_classification, Category::retrieval};

struct LabeledItem {
  std::string id;
  std::string text;
  std::string label;
  Split split = Split::train;

  friend bool operator==(const LabeledItem&, const LabeledItem&) = default;
};

// Classification and clustering tasks share this shape.
struct LabeledTextDataset {
  std::vector<LabeledItem> items;
  std::string source;

  friend bool operator==(const LabeledTextDataset&, const LabeledTextDataset&) = default;
};

struct PairItem {
  std::string id;
  std::string sent1;
  std::string sent2;
  int label = 0;  // 0 or 1
  Split split = Split::train;

  friend bool operator==(const PairItem&, const PairItem&) = default;
};

struct PairDataset {
  std::vector<PairItem> items;
  std::string source;

  friend bool operator==(const PairDataset&, const PairDataset&) = default;
};

struct TextRecord {
  std::string id;
  std::string text;

  friend bool operator==(const TextRecord&, const TextRecord&) = default;
};

struct Qrel {
  std::string qid;
  std::string did;
  std::int64_t score = 0;

  friend bool operator==(const Qrel&, const Qrel&) = default;
};

struct RetrievalDataset {
  std::vector<TextRecord> queries;
  std::vector<TextRecord> corpus;
  std::vector<Qrel> qrels;
  std::string source;

  friend bool operator==(const RetrievalDataset&, const RetrievalDataset&) = default;
};

using TaskDataset = std::variant<LabeledTextDataset, PairDataset, RetrievalDataset>;

// Loaders validate the invariants of each shape and throw ValidationError with
// the offending line number on malformed input. Text is NFC-normalized.
LabeledTextDataset load_labeled(const std::filesystem::path& jsonl);
PairDataset load_pairs(const std::filesystem::path& jsonl);
// `dir` holds corpus.jsonl, queries.jsonl and qrels.tsv.
RetrievalDataset load_retrieval(const std::filesystem::path& dir);
TaskDataset load_dataset(const std::filesystem::path& path, Category category);

void save_labeled(const LabeledTextDataset& d, const std::filesystem::path& jsonl);
void save_pairs(const PairDataset& d, const std::filesystem::path& jsonl);
void save_retrieval(const RetrievalDataset& d, const std::filesystem::path& dir);

void validate(const LabeledTextDataset& d);
void validate(const PairDataset& d);
void validate(const RetrievalDataset& d);

// Items tagged with `split`, in original order. May be empty; consumers that
// need the split raise the error.
LabeledTextDataset split_view(const LabeledTextDataset& d, Split split);
PairDataset split_view(const PairDataset& d, Split split);

}  // namespace medteb
