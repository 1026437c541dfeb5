#include "lao/errors.hpp"
#include "lao/gateway.hpp"
#include "lao/sha256.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace lao;
using namespace lao::testing;
using nlohmann::json;

namespace {

CompletionRecord make_record(const std::string& prompt,
                             const std::string& response) {
  CompletionRequest req;
  req.prompt = prompt;
  CompletionRecord rec;
  rec.request_hash = request_hash(req);
  rec.request_json = canonical_request_json(req);
  rec.raw_response = response;
  rec.timestamp = "2025-01-01T00:00:00Z";
  return rec;
}

} // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // block-boundary lengths
  CHECK(sha256_hex(std::string(64, 'a')) ==
        sha256_hex(std::string(64, 'a')));
}

TEST_CASE("canonical request json is sorted and whitespace-free") {
  CompletionRequest req;
  req.prompt = "hello";
  req.model_id = "gpt-4";
  req.temperature = 0.0;
  req.max_tokens = 1024;
  CHECK(canonical_request_json(req) ==
        R"({"max_tokens":1024,"model_id":"gpt-4","prompt":"hello","temperature":0.0})");
}

TEST_CASE("request hashes separate distinct requests") {
  CompletionRequest a, b, c, d;
  a.prompt = b.prompt = c.prompt = d.prompt = "same";
  b.model_id = "other-model";
  c.temperature = 0.5;
  d.max_tokens = 2048;
  std::set<std::string> hashes = {request_hash(a), request_hash(b),
                                  request_hash(c), request_hash(d)};
  CHECK(hashes.size() == 4);
  CHECK(request_hash(a) == request_hash(CompletionRequest{a}));
}

TEST_CASE("record store round trip") {
  SUBCASE("zero records") {
    const auto path = write_temp("store", "");
    RecordStore::write_all(path, {});
    CHECK(read_file(path).empty());
    const RecordStore store = RecordStore::load(path);
    CHECK(store.records().empty());
  }
  SUBCASE("three records, order preserved") {
    std::vector<CompletionRecord> records = {make_record("p1", "r1"),
                                             make_record("p2", "r2"),
                                             make_record("p3", "r3")};
    const auto path = write_temp("store", "");
    RecordStore::write_all(path, records);
    const RecordStore store = RecordStore::load(path);
    REQUIRE(store.records().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(store.records()[i].request_hash == records[i].request_hash);
      CHECK(store.records()[i].raw_response == records[i].raw_response);
    }
    const std::string text = read_file(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }
}

TEST_CASE("truncated store is an integrity error naming the line") {
  std::vector<CompletionRecord> records = {make_record("p1", "r1"),
                                           make_record("p2", "r2")};
  const auto path = write_temp("store", "");
  RecordStore::write_all(path, records);
  std::string text = read_file(path);
  text.pop_back(); // drop the final newline
  const auto broken = write_temp("store_broken", text);
  CHECK_THROWS_WITH_AS(RecordStore::load(broken), doctest::Contains("line 2"),
                       ParseError);
}

TEST_CASE("corrupt json line is an integrity error naming the line") {
  std::vector<CompletionRecord> records = {make_record("p1", "r1")};
  const auto path = write_temp("store", "");
  RecordStore::write_all(path, records);
  std::string text = read_file(path);
  text += "{not json\n";
  const auto broken = write_temp("store_broken", text);
  CHECK_THROWS_WITH_AS(RecordStore::load(broken), doctest::Contains("line 2"),
                       ParseError);
}

TEST_CASE("tampered hash is an integrity error") {
  CompletionRecord rec = make_record("p1", "r1");
  rec.request_hash[0] = rec.request_hash[0] == 'f' ? 'e' : 'f';
  const auto path = write_temp("store", "");
  RecordStore::write_all(path, {rec});
  CHECK_THROWS_WITH_AS(RecordStore::load(path),
                       doctest::Contains("does not match"), ParseError);
}

TEST_CASE("replay returns stored responses and errors on misses") {
  std::vector<CompletionRecord> records = {make_record("known prompt", "the answer")};
  const auto path = write_temp("store", "");
  RecordStore::write_all(path, records);
  Gateway gateway = Gateway::replay(RecordStore::load(path));

  CompletionRequest req;
  req.prompt = "known prompt";
  CHECK(gateway.complete(req) == "the answer");

  req.prompt = "never recorded";
  CHECK_THROWS_WITH_AS(gateway.complete(req),
                       doctest::Contains("uncached request"), GatewayError);
  try {
    gateway.complete(req);
  } catch (const GatewayError& e) {
    CHECK(e.uncached());
  }
}

TEST_CASE("default gateway backoff parameters") {
  GatewayConfig config;
  CHECK(config.max_attempts == 5);
  CHECK(config.backoff_base_s == 1.0);
}

TEST_CASE("live mode retries 429 and records the completion") {
  std::atomic<int> calls{0};
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                const int call = ++calls;
                if (call <= 2) {
                  res.status = 429;
                  res.set_content("slow down", "text/plain");
                  return;
                }
                const json body = json::parse(req.body);
                CHECK(body.at("model") == "gpt-4");
                CHECK(body.at("messages").at(0).at("role") == "user");
                CHECK(req.get_header_value("Authorization") ==
                      "Bearer test-key");
                json reply = {
                    {"choices",
                     json::array(
                         {{{"message",
                            {{"role", "assistant"},
                             {"content", "SENTENCE: ok"}}}}})}};
                res.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  GatewayConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.api_key = "test-key";
  config.backoff_base_s = 0.01;
  auto sink = std::make_shared<RecordStore>();
  const auto sink_path = write_temp("sink", "");
  sink->open_append(sink_path);
  Gateway gateway = Gateway::live(config, sink);

  CompletionRequest req;
  req.prompt = "mark this";
  CHECK(gateway.complete(req) == "SENTENCE: ok");
  CHECK(calls == 3);
  REQUIRE(sink->records().size() == 1);
  CHECK(sink->records()[0].request_hash == request_hash(req));
  CHECK(sink->records()[0].raw_response == "SENTENCE: ok");
  // the appended store loads back
  const RecordStore persisted = RecordStore::load(sink_path);
  REQUIRE(persisted.records().size() == 1);
  CHECK(persisted.records()[0].raw_response == "SENTENCE: ok");

  server.stop();
  server_thread.join();
}

TEST_CASE("live mode treats plain 4xx as non-retryable") {
  std::atomic<int> calls{0};
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                ++calls;
                res.status = 400;
                res.set_content("bad request", "text/plain");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  GatewayConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.backoff_base_s = 0.01;
  Gateway gateway = Gateway::live(config, nullptr);
  CompletionRequest req;
  req.prompt = "x";
  CHECK_THROWS_WITH_AS(gateway.complete(req), doctest::Contains("HTTP 400"),
                       GatewayError);
  CHECK(calls == 1);

  server.stop();
  server_thread.join();
}

TEST_CASE("live mode gives up after max attempts") {
  std::atomic<int> calls{0};
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                ++calls;
                res.status = 503;
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  GatewayConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.max_attempts = 3;
  config.backoff_base_s = 0.005;
  Gateway gateway = Gateway::live(config, nullptr);
  CompletionRequest req;
  req.prompt = "x";
  CHECK_THROWS_WITH_AS(gateway.complete(req), doctest::Contains("exhausted"),
                       GatewayError);
  CHECK(calls == 3);

  server.stop();
  server_thread.join();
}
