#include "lao/gateway.hpp"

#include "lao/errors.hpp"
#include "lao/sha256.hpp"

#include <nlohmann/json.hpp>

// httplib pulls in OpenSSL only when explicitly enabled; plain HTTP is
// all the wire protocol needs here and keeps replay runs socket-free.
#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

using nlohmann::json;

namespace lao {

std::string canonical_request_json(const CompletionRequest& req) {
  // nlohmann::json keeps object keys sorted, dump() emits no
  // insignificant whitespace; together that is the canonical form.
  json j = {{"max_tokens", req.max_tokens},
            {"model_id", req.model_id},
            {"prompt", req.prompt},
            {"temperature", req.temperature}};
  return j.dump();
}

std::string request_hash(const CompletionRequest& req) {
  return sha256_hex(canonical_request_json(req));
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

RecordStore RecordStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open record store " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  RecordStore store;
  if (data.empty()) return store;
  if (data.back() != '\n') {
    const std::size_t last_line =
        static_cast<std::size_t>(std::count(data.begin(), data.end(), '\n')) + 1;
    throw ParseError("record store " + path.string() + ": line " +
                     std::to_string(last_line) +
                     " truncated (missing trailing newline)");
  }

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    const std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty())
      throw ParseError("record store " + path.string() + ": blank line " +
                       std::to_string(line_no));
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("record store " + path.string() + ": line " +
                       std::to_string(line_no) + ": " + e.what());
    }
    CompletionRecord rec;
    try {
      rec.request_hash = j.at("request_hash").get<std::string>();
      rec.request_json = j.at("request").dump();
      rec.raw_response = j.at("response").get<std::string>();
      rec.timestamp = j.value("timestamp", std::string());
    } catch (const json::exception& e) {
      throw ParseError("record store " + path.string() + ": line " +
                       std::to_string(line_no) + ": " + e.what());
    }
    if (sha256_hex(rec.request_json) != rec.request_hash)
      throw ParseError("record store " + path.string() + ": line " +
                       std::to_string(line_no) +
                       ": request_hash does not match request");
    store.by_hash_[rec.request_hash] = store.records_.size();
    store.records_.push_back(std::move(rec));
  }
  return store;
}

namespace {

std::string record_line(const CompletionRecord& rec) {
  json j = {{"request", json::parse(rec.request_json)},
            {"request_hash", rec.request_hash},
            {"response", rec.raw_response},
            {"timestamp", rec.timestamp}};
  return j.dump();
}

} // namespace

void RecordStore::write_all(const std::filesystem::path& path,
                            const std::vector<CompletionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write record store " + path.string());
  for (const auto& rec : records) out << record_line(rec) << "\n";
}

void RecordStore::open_append(const std::filesystem::path& path) {
  append_path_ = path;
}

void RecordStore::append(const CompletionRecord& record) {
  std::lock_guard<std::mutex> lock(*append_mutex_);
  if (!append_path_.empty()) {
    std::ofstream out(append_path_, std::ios::binary | std::ios::app);
    if (!out)
      throw ParseError("cannot append to record store " + append_path_.string());
    out << record_line(record) << "\n";
    out.flush();
  }
  by_hash_[record.request_hash] = records_.size();
  records_.push_back(record);
}

const CompletionRecord* RecordStore::find(const std::string& hash) const {
  auto it = by_hash_.find(hash);
  return it == by_hash_.end() ? nullptr : &records_[it->second];
}

Gateway Gateway::replay(RecordStore store) {
  Gateway g;
  g.mode_ = Mode::Replay;
  g.store_ = std::move(store);
  return g;
}

Gateway Gateway::live(GatewayConfig config, std::shared_ptr<RecordStore> sink) {
  Gateway g;
  g.mode_ = Mode::Live;
  g.config_ = std::move(config);
  g.sink_ = std::move(sink);
  return g;
}

namespace {

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

std::string extract_message_text(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw GatewayError(std::string("malformed completion response: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw GatewayError("completion response has no choices");
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content"))
    throw GatewayError("completion response has no message content");
  return choice["message"]["content"].get<std::string>();
}

} // namespace

std::string Gateway::complete(const CompletionRequest& req) {
  if (req.prompt.empty()) throw GatewayError("empty prompt");
  const std::string hash = request_hash(req);

  if (mode_ == Mode::Replay) {
    const CompletionRecord* rec = store_.find(hash);
    if (!rec)
      throw GatewayError("uncached request " + hash, /*uncached=*/true);
    return rec->raw_response;
  }

  json body = {{"model", req.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens}};
  const std::string payload = body.dump();

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(30, 0);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay_s =
          config_.backoff_base_s * static_cast<double>(1 << (attempt - 2));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
    }
    auto res = client.Post("/v1/chat/completions", headers, payload,
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      std::string text = extract_message_text(res->body);
      if (sink_) {
        CompletionRecord rec;
        rec.request_hash = hash;
        rec.request_json = canonical_request_json(req);
        rec.raw_response = text;
        rec.timestamp = utc_timestamp_now();
        sink_->append(rec);
      }
      return text;
    }
    if (!retryable_status(res->status))
      throw GatewayError("HTTP " + std::to_string(res->status) + ": " + res->body);
    last_error = "HTTP " + std::to_string(res->status);
  }
  throw GatewayError("exhausted " + std::to_string(config_.max_attempts) +
                     " attempts: " + last_error);
}

} // namespace lao
