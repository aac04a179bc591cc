#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "medteb/matrix.hpp"

namespace medteb {

enum class ProviderKind { file_store, hash_baseline, http };

std::string_view to_string(ProviderKind k);

struct ProviderSpec {
  ProviderKind kind = ProviderKind::hash_baseline;
  std::string name;
  std::size_t dim = 0;  // 0: take it from the store header or the /info handshake
  bool normalize = false;

  std::filesystem::path path;  // file_store
  std::uint64_t seed = 0;      // hash_baseline

  // http
  std::string url;  // falls back to $EMBED_SERVER_URL
  std::size_t batch_limit = 64;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds timeout{30000};
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};

  // Optional trained projection head applied on top of the provider.
  std::filesystem::path head;
};

// Parses a provider spec TOML file. Relative paths resolve against its directory.
ProviderSpec load_provider_spec(const std::filesystem::path& toml_path);
void validate(const ProviderSpec& spec);

// Maps text lists to fixed-dimension vectors. Implementations must be safe to
// call from several threads when supports_concurrency() is true.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() = 0;
  virtual bool supports_concurrency() const { return true; }

  // One row per input, in input order. Throws ProviderError on failure and
  // ValidationError on an empty list.
  EmbeddingMatrix embed(std::span<const std::string> texts);

 protected:
  virtual EmbeddingMatrix embed_texts(std::span<const std::string> texts) = 0;
  // Whether embed() should L2-normalize rows (http providers ask the server instead).
  virtual bool normalize_locally() const { return false; }
};

// Deterministic pseudo-random unit vector for (text, seed). Uses only integer
// hashing, division and sqrt, so the bits are identical on every IEEE-754 platform.
Vector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

class HashProvider final : public EmbeddingProvider {
 public:
  HashProvider(std::size_t dim, std::uint64_t seed, std::string name = {});
  std::string name() const override { return name_; }
  std::size_t dim() override { return dim_; }

 protected:
  EmbeddingMatrix embed_texts(std::span<const std::string> texts) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::string name_;
};

// Precomputed vectors keyed by exact (NFC) text.
class FileStoreProvider final : public EmbeddingProvider {
 public:
  // Store file: header line {"dim": d}, then {"text": str, "vector": [d reals]} per line.
  static std::unique_ptr<FileStoreProvider> load(const std::filesystem::path& path, bool normalize,
                                                 std::string name = {});
  FileStoreProvider(std::size_t dim, std::unordered_map<std::string, Vector> vectors, bool normalize,
                    std::string name = {});

  std::string name() const override { return name_; }
  std::size_t dim() override { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 protected:
  EmbeddingMatrix embed_texts(std::span<const std::string> texts) override;
  bool normalize_locally() const override { return normalize_; }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Vector> vectors_;
  bool normalize_;
  std::string name_;
};

void save_file_store(const std::filesystem::path& path, std::size_t dim, std::span<const std::string> texts,
                     const EmbeddingMatrix& vectors);

struct ServerInfo {
  std::string model;
  std::size_t dim = 0;
  std::size_t max_batch = 0;
};

// Client for the GET /info + POST /embed protocol. Requests are split into
// batches of at most min(batch_limit, max_batch) texts and issued with up to
// max_in_flight concurrent connections; the result keeps input order.
class HttpProvider final : public EmbeddingProvider {
 public:
  explicit HttpProvider(ProviderSpec spec);

  std::string name() const override;
  std::size_t dim() override;
  ServerInfo info();

 protected:
  EmbeddingMatrix embed_texts(std::span<const std::string> texts) override;

 private:
  EmbeddingMatrix post_batch(std::span<const std::string> texts);

  ProviderSpec spec_;
  std::string scheme_host_port_;
  std::string token_;
  std::once_flag handshake_once_;
  ServerInfo info_;
};

// Builds the provider described by `spec`, wrapping it in the projection head
// if `spec.head` is set.
std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec);

}  // namespace medteb
