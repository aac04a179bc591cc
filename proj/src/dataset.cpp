#include "medteb/dataset.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "medteb/text.hpp"

namespace medteb {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::classification: return "classification";
    case Category::clustering: return "clustering";
    case Category::pair_classification: return "pair_classification";
    case Category::retrieval: return "retrieval";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw ValidationError("invalid split value '" + std::string(s) + "'");
}

Category parse_category(std::string_view s) {
  if (s == "classification") return Category::classification;
  if (s == "clustering") return Category::clustering;
  if (s == "pair_classification") return Category::pair_classification;
  if (s == "retrieval") return Category::retrieval;
  throw ValidationError("unknown task category '" + std::string(s) + "'");
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

// Calls `fn(object, line_number)` for every nonblank line.
void for_each_json_line(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where(path, lineno) + "malformed JSON line (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ValidationError(where(path, lineno) + "expected a JSON object");
    fn(obj, lineno);
  }
}

std::string get_string(const json& obj, const char* key, const fs::path& path, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(where(path, line) + "schema mismatch: missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

Split get_split(const json& obj, const fs::path& path, std::size_t line) {
  const std::string value = get_string(obj, "split", path, line);
  if (value != "train" && value != "validation" && value != "test") {
    throw ValidationError(where(path, line) + "invalid split value '" + value + "'");
  }
  return parse_split(value);
}

class IdSet {
 public:
  explicit IdSet(std::string what) : what_(std::move(what)) {}
  void insert(const std::string& id, const std::string& context) {
    if (!seen_.insert(id).second) throw ValidationError(context + "duplicate " + what_ + " \"" + id + "\"");
  }
  bool contains(const std::string& id) const { return seen_.contains(id); }

 private:
  std::string what_;
  std::unordered_set<std::string> seen_;
};

std::vector<TextRecord> load_text_records(const fs::path& path, IdSet& ids) {
  std::vector<TextRecord> out;
  for_each_json_line(path, [&](const json& obj, std::size_t line) {
    TextRecord r{get_string(obj, "_id", path, line), nfc(get_string(obj, "text", path, line))};
    ids.insert(r.id, where(path, line));
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace

LabeledTextDataset load_labeled(const fs::path& jsonl) {
  LabeledTextDataset d;
  IdSet ids("id");
  for_each_json_line(jsonl, [&](const json& obj, std::size_t line) {
    LabeledItem item;
    item.id = get_string(obj, "id", jsonl, line);
    item.text = nfc(get_string(obj, "text", jsonl, line));
    item.label = nfc(get_string(obj, "label", jsonl, line));
    item.split = get_split(obj, jsonl, line);
    ids.insert(item.id, where(jsonl, line));
    d.items.push_back(std::move(item));
  });
  return d;
}

PairDataset load_pairs(const fs::path& jsonl) {
  PairDataset d;
  IdSet ids("id");
  for_each_json_line(jsonl, [&](const json& obj, std::size_t line) {
    PairItem item;
    item.id = get_string(obj, "id", jsonl, line);
    item.sent1 = nfc(get_string(obj, "sent1", jsonl, line));
    item.sent2 = nfc(get_string(obj, "sent2", jsonl, line));
    const auto label = obj.find("label");
    if (label == obj.end() || !label->is_number_integer() || (label->get<int>() != 0 && label->get<int>() != 1)) {
      throw ValidationError(where(jsonl, line) + "schema mismatch: \"label\" must be 0 or 1");
    }
    item.label = label->get<int>();
    item.split = get_split(obj, jsonl, line);
    ids.insert(item.id, where(jsonl, line));
    d.items.push_back(std::move(item));
  });
  return d;
}

RetrievalDataset load_retrieval(const fs::path& dir) {
  RetrievalDataset d;
  IdSet qids("query id");
  IdSet dids("document id");
  d.corpus = load_text_records(dir / "corpus.jsonl", dids);
  d.queries = load_text_records(dir / "queries.jsonl", qids);

  const fs::path qrels_path = dir / "qrels.tsv";
  auto in = open_input(qrels_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 3) throw ValidationError(where(qrels_path, lineno) + "expected 3 tab-separated columns");
    std::int64_t score = 0;
    try {
      std::size_t used = 0;
      score = std::stoll(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      // BEIR files start with a "query-id corpus-id score" header.
      if (lineno == 1 && d.qrels.empty()) continue;
      throw ValidationError(where(qrels_path, lineno) + "score must be an integer");
    }
    if (score < 0) throw ValidationError(where(qrels_path, lineno) + "score must be nonnegative");
    if (!qids.contains(cols[0])) throw ValidationError(where(qrels_path, lineno) + "unknown query id \"" + cols[0] + "\"");
    if (!dids.contains(cols[1])) throw ValidationError(where(qrels_path, lineno) + "unknown document id \"" + cols[1] + "\"");
    d.qrels.push_back({cols[0], cols[1], score});
  }
  return d;
}

TaskDataset load_dataset(const fs::path& path, Category category) {
  switch (category) {
    case Category::classification:
    case Category::clustering: return load_labeled(path);
    case Category::pair_classification: return load_pairs(path);
    case Category::retrieval: return load_retrieval(path);
  }
  throw ValidationError("unknown category");
}

void save_labeled(const LabeledTextDataset& d, const fs::path& jsonl) {
  auto out = open_output(jsonl);
  for (const auto& item : d.items) {
    out << json{{"id", item.id}, {"text", item.text}, {"label", item.label}, {"split", to_string(item.split)}}.dump()
        << '\n';
  }
}

void save_pairs(const PairDataset& d, const fs::path& jsonl) {
  auto out = open_output(jsonl);
  for (const auto& item : d.items) {
    out << json{{"id", item.id},
                {"sent1", item.sent1},
                {"sent2", item.sent2},
                {"label", item.label},
                {"split", to_string(item.split)}}
               .dump()
        << '\n';
  }
}

void save_retrieval(const RetrievalDataset& d, const fs::path& dir) {
  fs::create_directories(dir);
  auto write_records = [](const std::vector<TextRecord>& records, const fs::path& path) {
    auto out = open_output(path);
    for (const auto& r : records) out << json{{"_id", r.id}, {"text", r.text}}.dump() << '\n';
  };
  write_records(d.corpus, dir / "corpus.jsonl");
  write_records(d.queries, dir / "queries.jsonl");
  auto out = open_output(dir / "qrels.tsv");
  for (const auto& q : d.qrels) out << q.qid << '\t' << q.did << '\t' << q.score << '\n';
}

void validate(const LabeledTextDataset& d) {
  IdSet ids("id");
  for (const auto& item : d.items) ids.insert(item.id, "labeled dataset: ");
}

void validate(const PairDataset& d) {
  IdSet ids("id");
  for (const auto& item : d.items) {
    ids.insert(item.id, "pair dataset: ");
    if (item.label != 0 && item.label != 1) throw ValidationError("pair dataset: label must be 0 or 1");
  }
}

void validate(const RetrievalDataset& d) {
  IdSet qids("query id");
  IdSet dids("document id");
  for (const auto& q : d.queries) qids.insert(q.id, "retrieval dataset: ");
  for (const auto& doc : d.corpus) dids.insert(doc.id, "retrieval dataset: ");
  for (const auto& r : d.qrels) {
    if (!qids.contains(r.qid)) throw ValidationError("retrieval dataset: qrels references unknown query \"" + r.qid + "\"");
    if (!dids.contains(r.did)) throw ValidationError("retrieval dataset: qrels references unknown document \"" + r.did + "\"");
    if (r.score < 0) throw ValidationError("retrieval dataset: negative qrels score");
  }
}

LabeledTextDataset split_view(const LabeledTextDataset& d, Split split) {
  LabeledTextDataset out;
  out.source = d.source;
  for (const auto& item : d.items) {
    if (item.split == split) out.items.push_back(item);
  }
  return out;
}

PairDataset split_view(const PairDataset& d, Split split) {
  PairDataset out;
  out.source = d.source;
  for (const auto& item : d.items) {
    if (item.split == split) out.items.push_back(item);
  }
  return out;
}

}  // namespace medteb
