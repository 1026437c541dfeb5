#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace lao {

struct CompletionRequest {
  std::string prompt;
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
};

// Canonical form used for hashing and storage: JSON object with sorted
// keys, UTF-8, no insignificant whitespace.
std::string canonical_request_json(const CompletionRequest& req);
std::string request_hash(const CompletionRequest& req); // sha256 hex

struct CompletionRecord {
  std::string request_hash;
  std::string request_json; // canonical
  std::string raw_response;
  std::string timestamp; // UTC ISO-8601
};

// Append-only JSONL store of completion records. Every record occupies
// exactly one newline-terminated line; a final line without its newline
// is treated as a truncation and rejected at load time.
class RecordStore {
public:
  RecordStore() : append_mutex_(std::make_unique<std::mutex>()) {}

  static RecordStore load(const std::filesystem::path& path);
  static void write_all(const std::filesystem::path& path,
                        const std::vector<CompletionRecord>& records);

  // Opens (creates) the backing file for appends.
  void open_append(const std::filesystem::path& path);
  void append(const CompletionRecord& record);

  const CompletionRecord* find(const std::string& hash) const;
  const std::vector<CompletionRecord>& records() const { return records_; }

private:
  std::vector<CompletionRecord> records_;
  std::map<std::string, std::size_t> by_hash_; // last record wins
  std::filesystem::path append_path_;
  std::unique_ptr<std::mutex> append_mutex_;
};

struct GatewayConfig {
  std::string base_url;      // scheme://host[:port], no trailing /v1
  std::string api_key;       // bearer token, from LAO_API_KEY
  int max_attempts = 5;      // exponential backoff: base, x2 per retry
  double backoff_base_s = 1.0;
};

// Chat-completion access with deterministic record/replay. Replay mode
// answers from an immutable store snapshot and never opens a socket;
// live mode POSTs {base_url}/v1/chat/completions and appends a record
// per successful completion. complete() is safe to call concurrently.
class Gateway {
public:
  static Gateway replay(RecordStore store);
  static Gateway live(GatewayConfig config, std::shared_ptr<RecordStore> sink);

  bool is_replay() const { return mode_ == Mode::Replay; }
  std::string complete(const CompletionRequest& req);

private:
  enum class Mode { Replay, Live };
  Gateway() = default;

  Mode mode_ = Mode::Replay;
  RecordStore store_; // replay snapshot
  GatewayConfig config_;
  std::shared_ptr<RecordStore> sink_;
};

std::string utc_timestamp_now();

} // namespace lao
