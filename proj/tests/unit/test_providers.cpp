#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "../support/fixtures.hpp"
#include "medteb/error.hpp"
#include "medteb/metrics.hpp"
#include "medteb/providers.hpp"

using namespace medteb;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("hash provider contract") {
  const auto a = hash_embed("chest pain", 64, 3);
  CHECK(a == hash_embed("chest pain", 64, 3));
  CHECK(a != hash_embed("chest pain", 64, 4));
  CHECK(l2_norm(a) == doctest::Approx(1.0).epsilon(1e-9));

  // random directions in 256 dims are nearly orthogonal
  double total = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto u = hash_embed("text-a-" + std::to_string(i), 256, 1);
    const auto v = hash_embed("text-b-" + std::to_string(i), 256, 1);
    total += std::abs(pair_score(u, v, PairMetric::cosine));
  }
  CHECK(total / 1000 < 0.2);

  HashProvider h(16, 9);
  const std::vector<std::string> ab{"a", "b"}, ba{"b", "a"};
  const auto m1 = h.embed(ab), m2 = h.embed(ba);
  CHECK(std::vector<double>(m1.row(0).begin(), m1.row(0).end()) == std::vector<double>(m2.row(1).begin(), m2.row(1).end()));
  const auto single = h.embed(std::vector<std::string>{"b"});
  CHECK(std::vector<double>(single.row(0).begin(), single.row(0).end()) ==
        std::vector<double>(m1.row(1).begin(), m1.row(1).end()));
  CHECK_THROWS_AS(h.embed(std::vector<std::string>{}), ValidationError);
}

TEST_CASE("file store provider") {
  const auto dir = fixtures::temp_dir("store");
  fixtures::write_text(dir / "s.jsonl", "{\"dim\": 2}\n{\"text\": \"abc\", \"vector\": [1, 0]}\n{\"text\": \"xyz\", \"vector\": [3, 4]}\n");
  auto p = FileStoreProvider::load(dir / "s.jsonl", false);
  const auto m = p->embed(std::vector<std::string>{"abc"});
  CHECK(m.data() == std::vector<double>{1, 0});
  CHECK_THROWS_AS(p->embed(std::vector<std::string>{"missing"}), ProviderError);
  auto n = FileStoreProvider::load(dir / "s.jsonl", true);
  CHECK(n->embed(std::vector<std::string>{"xyz"}).data() == std::vector<double>{0.6, 0.8});

  fixtures::write_text(dir / "dup.jsonl", "{\"dim\": 1}\n{\"text\": \"a\", \"vector\": [1]}\n{\"text\": \"a\", \"vector\": [2]}\n");
  CHECK_THROWS_AS(FileStoreProvider::load(dir / "dup.jsonl", false), ValidationError);
  fixtures::write_text(dir / "dim.jsonl", "{\"dim\": 2}\n{\"text\": \"a\", \"vector\": [1]}\n");
  CHECK_THROWS_AS(FileStoreProvider::load(dir / "dim.jsonl", false), ValidationError);

  fixtures::write_text(dir / "p.toml", "kind = \"file_store\"\npath = \"s.jsonl\"\nnormalize = true\n");
  const auto spec = load_provider_spec(dir / "p.toml");
  CHECK(spec.kind == ProviderKind::file_store);
  CHECK(spec.path == dir / "s.jsonl");
  CHECK(make_provider(spec)->dim() == 2);
  fixtures::write_text(dir / "bad.toml", "kind = \"quantum\"\n");
  CHECK_THROWS_AS(load_provider_spec(dir / "bad.toml"), ValidationError);
  fs::remove_all(dir);
}

namespace {

// In-process implementation of the embedding server protocol.
struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::size_t dim = 8;
  std::size_t advertised_max_batch = 4;
  std::size_t enforced_max_batch = 4;
  bool break_normalization = false;
  int fail_first = 0;  // number of 500 responses before succeeding
  std::atomic<int> embed_requests{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak_in_flight{0};
  std::mutex mu;
  std::string last_auth;

  TestServer() {
    server.Get("/info", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu);
        last_auth = req.get_header_value("Authorization");
      }
      res.set_content(json{{"model", "test-model"}, {"dim", dim}, {"max_batch", advertised_max_batch}}.dump(),
                      "application/json");
    });
    server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight;
      int peak = peak_in_flight.load();
      while (now > peak && !peak_in_flight.compare_exchange_weak(peak, now)) {
      }
      const int n = ++embed_requests;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      const json body = json::parse(req.body, nullptr, false);
      if (n <= fail_first) {
        res.status = 500;
        res.set_content(json{{"error", "warming up"}}.dump(), "application/json");
      } else if (body.is_discarded() || !body.contains("texts") || body["texts"].empty()) {
        res.status = 400;
        res.set_content(json{{"error", "empty"}}.dump(), "application/json");
      } else if (body["texts"].size() > enforced_max_batch) {
        res.status = 413;
        res.set_content(json{{"error", "too large"}}.dump(), "application/json");
      } else {
        json rows = json::array();
        for (const auto& t : body["texts"]) {
          auto v = hash_embed(t.get<std::string>(), dim, 17);
          if (break_normalization) v[0] += 0.5;
          rows.push_back(v);
        }
        res.set_content(json{{"embeddings", rows}, {"dim", dim}}.dump(), "application/json");
      }
      --in_flight;
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  ProviderSpec spec() const {
    ProviderSpec s;
    s.kind = ProviderKind::http;
    s.url = "http://127.0.0.1:" + std::to_string(port);
    s.initial_backoff = std::chrono::milliseconds(1);
    s.timeout = std::chrono::milliseconds(5000);
    return s;
  }
};

std::vector<std::string> numbered(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("text number " + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("http provider handshake, ordering and batching") {
  TestServer srv;
  auto spec = srv.spec();
  spec.batch_limit = 64;  // the server's max_batch of 4 wins
  spec.max_in_flight = 3;
  spec.normalize = true;
  HttpProvider p(spec);
  CHECK(p.info().model == "test-model");
  CHECK(p.dim() == 8);

  const auto texts = numbered(23);
  const auto m = p.embed(texts);
  REQUIRE(m.rows() == 23);
  for (std::size_t i = 0; i < texts.size(); ++i)
    CHECK(std::vector<double>(m.row(i).begin(), m.row(i).end()) == hash_embed(texts[i], 8, 17));
  CHECK(srv.embed_requests == 6);
  CHECK(srv.peak_in_flight <= 3);

  // batch invariance
  std::vector<double> piecewise;
  for (const auto& t : texts) {
    const auto r = p.embed(std::vector<std::string>{t});
    piecewise.insert(piecewise.end(), r.data().begin(), r.data().end());
  }
  CHECK(piecewise == m.data());
  CHECK(p.embed(texts) == m);
}

TEST_CASE("http provider sends the bearer token") {
  TestServer srv;
  ::setenv("EMBED_SERVER_TOKEN", "sekret", 1);
  HttpProvider p(srv.spec());
  p.dim();
  ::unsetenv("EMBED_SERVER_TOKEN");
  std::lock_guard lock(srv.mu);
  CHECK(srv.last_auth == "Bearer sekret");
}

TEST_CASE("http provider error paths") {
  SUBCASE("413 is not retried") {
    TestServer srv;
    srv.advertised_max_batch = 10;
    srv.enforced_max_batch = 2;
    HttpProvider p(srv.spec());
    CHECK_THROWS_AS(p.embed(numbered(5)), ProviderError);
    CHECK(srv.embed_requests == 1);
  }
  SUBCASE("500 is retried with backoff") {
    TestServer srv;
    srv.fail_first = 2;
    HttpProvider p(srv.spec());
    CHECK(p.embed(numbered(2)).rows() == 2);
    CHECK(srv.embed_requests == 3);
  }
  SUBCASE("persistent 500 fails after the attempt budget") {
    TestServer srv;
    srv.fail_first = 100;
    HttpProvider p(srv.spec());
    CHECK_THROWS_AS(p.embed(numbered(1)), ProviderError);
    CHECK(srv.embed_requests == 3);
  }
  SUBCASE("non-unit rows are rejected when normalization was requested") {
    TestServer srv;
    srv.break_normalization = true;
    auto spec = srv.spec();
    spec.normalize = true;
    HttpProvider p(spec);
    CHECK_THROWS_AS(p.embed(numbered(2)), ProviderError);
  }
  SUBCASE("dimension mismatch against the spec") {
    TestServer srv;
    auto spec = srv.spec();
    spec.dim = 768;
    HttpProvider p(spec);
    CHECK_THROWS_AS(p.dim(), ProviderError);
  }
  SUBCASE("unreachable server") {
    ProviderSpec spec;
    spec.kind = ProviderKind::http;
    spec.url = "http://127.0.0.1:1";
    spec.initial_backoff = std::chrono::milliseconds(1);
    HttpProvider p(spec);
    CHECK_THROWS_AS(p.dim(), ProviderError);
  }
}
