#include "medteb/providers.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <future>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "medteb/error.hpp"
#include "medteb/metrics.hpp"
#include "medteb/rng.hpp"
#include "medteb/text.hpp"
#include "medteb/trainer.hpp"
#include "toml_util.hpp"

namespace medteb {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::file_store: return "file_store";
    case ProviderKind::hash_baseline: return "hash_baseline";
    case ProviderKind::http: return "http";
  }
  return "?";
}

ProviderSpec load_provider_spec(const fs::path& toml_path) {
  const toml::table t = parse_toml_file(toml_path);
  const fs::path base = toml_path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  ProviderSpec s;
  const std::string kind = toml_required_string(t, "kind", toml_path);
  if (kind == "file_store") s.kind = ProviderKind::file_store;
  else if (kind == "hash_baseline") s.kind = ProviderKind::hash_baseline;
  else if (kind == "http") s.kind = ProviderKind::http;
  else throw ValidationError(toml_path.string() + ": unknown provider kind '" + kind + "'");

  s.name = t["name"].value_or(std::string(kind));
  s.dim = static_cast<std::size_t>(toml_u64(t, "dim", 0));
  s.normalize = t["normalize"].value_or(false);
  if (const auto p = t["path"].value<std::string>()) s.path = resolve(*p);
  s.seed = toml_u64(t, "seed", 0);
  s.url = t["url"].value_or(std::string());
  s.batch_limit = static_cast<std::size_t>(toml_u64(t, "batch_limit", s.batch_limit));
  s.max_in_flight = static_cast<std::size_t>(toml_u64(t, "max_in_flight", s.max_in_flight));
  s.timeout = std::chrono::milliseconds(toml_u64(t, "timeout_ms", static_cast<std::uint64_t>(s.timeout.count())));
  s.attempts = static_cast<int>(toml_u64(t, "attempts", static_cast<std::uint64_t>(s.attempts)));
  s.initial_backoff =
      std::chrono::milliseconds(toml_u64(t, "backoff_ms", static_cast<std::uint64_t>(s.initial_backoff.count())));
  if (const auto h = t["head"].value<std::string>()) s.head = resolve(*h);
  validate(s);
  return s;
}

void validate(const ProviderSpec& s) {
  switch (s.kind) {
    case ProviderKind::hash_baseline:
      if (s.dim == 0) throw ValidationError("hash_baseline provider needs dim >= 1");
      break;
    case ProviderKind::file_store:
      if (s.path.empty()) throw ValidationError("file_store provider needs a path");
      break;
    case ProviderKind::http:
      if (s.url.empty() && std::getenv("EMBED_SERVER_URL") == nullptr) {
        throw ValidationError("http provider needs a url (or EMBED_SERVER_URL)");
      }
      if (s.batch_limit == 0 || s.max_in_flight == 0 || s.attempts < 1) {
        throw ValidationError("http provider: batch_limit, max_in_flight and attempts must be positive");
      }
      break;
  }
}

EmbeddingMatrix EmbeddingProvider::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw ValidationError("embed: empty text list");
  EmbeddingMatrix m = embed_texts(texts);
  if (m.rows() != texts.size()) {
    throw ProviderError(name() + ": returned " + std::to_string(m.rows()) + " rows for " +
                        std::to_string(texts.size()) + " texts");
  }
  if (m.dim() != dim()) {
    throw ProviderError(name() + ": returned dimension " + std::to_string(m.dim()) + ", expected " +
                        std::to_string(dim()));
  }
  if (!m.all_finite()) throw ProviderError(name() + ": returned non-finite values");
  if (normalize_locally()) {
    try {
      l2_normalize_rows(m);
    } catch (const ValidationError& e) {
      throw ProviderError(name() + ": " + e.what());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

Vector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  const std::uint64_t h = splitmix64(fnv1a64(text) ^ splitmix64(seed));
  Vector v(dim);
  double sq = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const std::uint64_t r = splitmix64(h + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(j) + 1));
    v[j] = static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;  // uniform on [-1, 1)
    sq += v[j] * v[j];
  }
  if (sq == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
  return v;
}

HashProvider::HashProvider(std::size_t dim, std::uint64_t seed, std::string name)
    : dim_(dim), seed_(seed), name_(name.empty() ? "hash-" + std::to_string(dim) : std::move(name)) {
  if (dim_ == 0) throw ValidationError("hash provider: dim must be >= 1");
}

EmbeddingMatrix HashProvider::embed_texts(std::span<const std::string> texts) {
  EmbeddingMatrix m(texts.size(), dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const Vector v = hash_embed(texts[i], dim_, seed_);
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

// ---------------------------------------------------------------------------

FileStoreProvider::FileStoreProvider(std::size_t dim, std::unordered_map<std::string, Vector> vectors, bool normalize,
                                     std::string name)
    : dim_(dim), vectors_(std::move(vectors)), normalize_(normalize), name_(name.empty() ? "file_store" : std::move(name)) {
  if (dim_ == 0) throw ValidationError("file store: dim must be >= 1");
  for (const auto& [text, v] : vectors_) {
    if (v.size() != dim_) throw ValidationError("file store: vector for \"" + text + "\" has wrong dimension");
  }
}

std::unique_ptr<FileStoreProvider> FileStoreProvider::load(const fs::path& path, bool normalize, std::string name) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file store " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  std::unordered_map<std::string, Vector> vectors;
  const auto fail = [&](const std::string& msg) {
    throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) fail("malformed JSON line");
    if (dim == 0) {
      if (!obj.contains("dim") || !obj["dim"].is_number_unsigned() || obj["dim"].get<std::size_t>() == 0) {
        fail("expected header {\"dim\": d}");
      }
      dim = obj["dim"].get<std::size_t>();
      continue;
    }
    if (!obj.contains("text") || !obj["text"].is_string() || !obj.contains("vector") || !obj["vector"].is_array()) {
      fail("expected {\"text\": str, \"vector\": [...]}");
    }
    Vector v;
    v.reserve(dim);
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) fail("vector entries must be numbers");
      v.push_back(x.get<double>());
    }
    if (v.size() != dim) fail("vector has " + std::to_string(v.size()) + " entries, header says " + std::to_string(dim));
    const std::string text = nfc(obj["text"].get<std::string>());
    const auto [it, inserted] = vectors.emplace(text, std::move(v));
    if (!inserted) fail("duplicate text \"" + text + "\"");
  }
  if (dim == 0) throw ValidationError(path.string() + ": empty file store");
  return std::make_unique<FileStoreProvider>(dim, std::move(vectors), normalize, std::move(name));
}

EmbeddingMatrix FileStoreProvider::embed_texts(std::span<const std::string> texts) {
  EmbeddingMatrix m(texts.size(), dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto it = vectors_.find(texts[i]);
    if (it == vectors_.end()) throw ProviderError(name_ + ": no stored vector for text \"" + texts[i] + "\"");
    std::copy(it->second.begin(), it->second.end(), m.row(i).begin());
  }
  return m;
}

void save_file_store(const fs::path& path, std::size_t dim, std::span<const std::string> texts,
                     const EmbeddingMatrix& vectors) {
  if (vectors.rows() != texts.size() || vectors.dim() != dim) throw ValidationError("save_file_store: shape mismatch");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << json{{"dim", dim}}.dump() << '\n';
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto r = vectors.row(i);
    out << json{{"text", texts[i]}, {"vector", std::vector<double>(r.begin(), r.end())}}.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

}  // namespace

HttpProvider::HttpProvider(ProviderSpec spec) : spec_(std::move(spec)) {
  scheme_host_port_ = spec_.url.empty() ? env_or("EMBED_SERVER_URL", "") : spec_.url;
  while (!scheme_host_port_.empty() && scheme_host_port_.back() == '/') scheme_host_port_.pop_back();
  if (scheme_host_port_.empty()) throw ValidationError("http provider: no server url");
  token_ = env_or("EMBED_SERVER_TOKEN", "");
}

std::string HttpProvider::name() const { return spec_.name.empty() ? "http:" + scheme_host_port_ : spec_.name; }

namespace {

httplib::Client make_client(const std::string& base, std::chrono::milliseconds timeout, const std::string& token) {
  httplib::Client cli(base);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  if (!token.empty()) cli.set_bearer_token_auth(token);
  return cli;
}

struct HttpFailure {
  bool retryable = true;
  std::string message;
};

}  // namespace

ServerInfo HttpProvider::info() {
  std::call_once(handshake_once_, [this] {
    auto backoff = spec_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt < spec_.attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      auto cli = make_client(scheme_host_port_, spec_.timeout, token_);
      const auto res = cli.Get("/info");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "GET /info returned status " + std::to_string(res->status);
        if (res->status < 500) break;
        continue;
      }
      const json body = json::parse(res->body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("dim") || !body["dim"].is_number_unsigned() ||
          !body.contains("max_batch") || !body["max_batch"].is_number_unsigned() || !body.contains("model") ||
          !body["model"].is_string()) {
        throw ProviderError(name() + ": malformed /info response");
      }
      ServerInfo info{body["model"].get<std::string>(), body["dim"].get<std::size_t>(),
                      body["max_batch"].get<std::size_t>()};
      if (info.dim == 0 || info.max_batch == 0) throw ProviderError(name() + ": /info reports zero dim or max_batch");
      if (spec_.dim != 0 && spec_.dim != info.dim) {
        throw ProviderError(name() + ": server dimension " + std::to_string(info.dim) + " does not match spec dim " +
                            std::to_string(spec_.dim));
      }
      info_ = info;
      return;
    }
    throw ProviderError(name() + ": handshake failed after " + std::to_string(spec_.attempts) + " attempts (" +
                        last_error + ")");
  });
  return info_;
}

std::size_t HttpProvider::dim() { return info().dim; }

EmbeddingMatrix HttpProvider::post_batch(std::span<const std::string> texts) {
  const json request{{"texts", std::vector<std::string>(texts.begin(), texts.end())}, {"normalize", spec_.normalize}};
  const std::string payload = request.dump();
  auto backoff = spec_.initial_backoff;
  HttpFailure failure;
  for (int attempt = 0; attempt < spec_.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto cli = make_client(scheme_host_port_, spec_.timeout, token_);
    const auto res = cli.Post("/embed", payload, "application/json");
    if (!res) {
      failure = {true, "transport error: " + httplib::to_string(res.error())};
      continue;
    }
    if (res->status != 200) {
      std::string detail;
      const json err = json::parse(res->body, nullptr, false);
      if (!err.is_discarded() && err.is_object() && err.contains("error") && err["error"].is_string()) {
        detail = ": " + err["error"].get<std::string>();
      }
      failure = {res->status >= 500, "POST /embed returned status " + std::to_string(res->status) + detail};
      if (!failure.retryable) break;
      continue;
    }
    const json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("embeddings") || !body["embeddings"].is_array()) {
      throw ProviderError(name() + ": malformed /embed response");
    }
    const auto& rows = body["embeddings"];
    const std::size_t d = info_.dim;
    if (body.contains("dim") && (!body["dim"].is_number_unsigned() || body["dim"].get<std::size_t>() != d)) {
      throw ProviderError(name() + ": /embed dim disagrees with /info");
    }
    if (rows.size() != texts.size()) {
      throw ProviderError(name() + ": /embed returned " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(texts.size()) + " texts");
    }
    EmbeddingMatrix m(texts.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || rows[i].size() != d) throw ProviderError(name() + ": /embed row has wrong dimension");
      for (std::size_t j = 0; j < d; ++j) {
        if (!rows[i][j].is_number()) throw ProviderError(name() + ": /embed row contains a non-number");
        m(i, j) = rows[i][j].get<double>();
      }
      if (spec_.normalize && std::abs(l2_norm(m.row(i)) - 1.0) > 1e-6) {
        throw ProviderError(name() + ": server returned a non-unit row although normalize was requested");
      }
    }
    return m;
  }
  throw ProviderError(name() + ": " + failure.message + " (after " + std::to_string(spec_.attempts) + " attempts)");
}

EmbeddingMatrix HttpProvider::embed_texts(std::span<const std::string> texts) {
  const ServerInfo server = info();
  const std::size_t chunk = std::max<std::size_t>(1, std::min(spec_.batch_limit, server.max_batch));
  const std::size_t num_chunks = (texts.size() + chunk - 1) / chunk;
  std::vector<EmbeddingMatrix> parts(num_chunks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < num_chunks; c = next++) {
      const std::size_t begin = c * chunk;
      const std::size_t len = std::min(chunk, texts.size() - begin);
      parts[c] = post_batch(texts.subspan(begin, len));
    }
  };
  const std::size_t workers = std::min(spec_.max_in_flight, num_chunks);
  std::vector<std::future<void>> running;
  for (std::size_t w = 1; w < workers; ++w) running.push_back(std::async(std::launch::async, worker));
  std::exception_ptr first_error;
  try {
    worker();
  } catch (...) {
    first_error = std::current_exception();
    next = num_chunks;
  }
  for (auto& f : running) {
    try {
      f.get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  EmbeddingMatrix out(texts.size(), server.dim);
  std::size_t row = 0;
  for (const auto& p : parts) {
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(row * server.dim));
    row += p.rows();
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  validate(spec);
  std::unique_ptr<EmbeddingProvider> base;
  switch (spec.kind) {
    case ProviderKind::hash_baseline: base = std::make_unique<HashProvider>(spec.dim, spec.seed, spec.name); break;
    case ProviderKind::file_store: {
      auto store = FileStoreProvider::load(spec.path, spec.normalize, spec.name);
      if (spec.dim != 0 && spec.dim != store->dim()) {
        throw ValidationError("file_store: spec dim " + std::to_string(spec.dim) + " does not match store dim " +
                              std::to_string(store->dim()));
      }
      base = std::move(store);
      break;
    }
    case ProviderKind::http: base = std::make_unique<HttpProvider>(spec); break;
  }
  if (spec.head.empty()) return base;
  return std::make_unique<ProjectedProvider>(std::move(base), load_checkpoint(spec.head).state);
}

}  // namespace medteb
