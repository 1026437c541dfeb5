#pragma once

#include "lao/corpus.hpp"
#include "lao/gateway.hpp"
#include "lao/prompt.hpp"
#include "lao/sampler.hpp"
#include "lao/scorer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lao {

struct ModelParams {
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string base_url = "https://api.openai.com";
};

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path ontology_path;
  std::filesystem::path template_dir; // empty = built-in templates
  std::filesystem::path out_dir = "out";
  std::filesystem::path replay_path;  // replay source; live-mode record sink
  std::vector<std::string> topics;    // empty = all retained topics
  Variant variant = Variant::Full;
  std::optional<std::uint64_t> seed;  // mandatory
  std::size_t k_shot = 5;
  std::size_t min_instances = 10;
  std::size_t min_chars = 25;
  std::size_t max_items = 0; // 0 = unlimited
  std::size_t limit = 0;     // extra truncation of the test sequence; 0 = off
  bool live = false;
  ModelParams model;
  double align_threshold = 0.5;
  int concurrency = 4;
  std::string api_key; // from LAO_API_KEY
};

// Flat key = value file mirroring the CLI flags; '#' starts a comment.
RunConfig load_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& config, const std::string& key,
                       const std::string& value);
// Checks seed presence and that all referenced paths resolve.
void validate_config(const RunConfig& config);

nlohmann::json config_to_json(const RunConfig& config);
std::string run_id_for(const RunConfig& config); // 12 hex chars, deterministic

// One prompt to complete: a (topic, event type, test item) triple.
struct PromptJob {
  std::size_t topic_index = 0;
  std::string topic;
  std::string event_type;
  std::size_t item_index = 0;
  std::size_t sentence_index = 0;
  std::string sent_id;
  std::string prompt;
};

struct TopicPlan {
  Topic topic; // retained event types only
  std::map<std::string, FewShotSet> few_shot;
  TestSequence sequence;
};

struct RunPlan {
  Ontology filtered;
  std::vector<std::size_t> eligible;
  std::vector<TopicPlan> topics;
  std::vector<PromptJob> jobs;
  std::vector<std::string> notices;
};

// Deterministic sampling + prompt rendering; no backend contact.
RunPlan plan_run(const RunConfig& config, const Ontology& ontology,
                 const Corpus& corpus, const TemplateSet& templates);

struct RunResult {
  std::string run_id;
  std::filesystem::path run_dir;
  nlohmann::json report;   // the report.json document
  nlohmann::json manifest; // the manifest.json document
  std::size_t item_errors = 0;
};

// Full pipeline: plan, complete, parse, align, score, persist. Artifacts
// land under out_dir/run_id/: manifest.json, prompts/, responses/,
// triplets.jsonl, predictions.jsonl, report.json, report.csv, roc.svg.
RunResult run_pipeline(const RunConfig& config);

// Writes the sampled splits (few-shot sets and test sequences) without
// querying any backend; returns the splits document.
nlohmann::json sample_splits(const RunConfig& config);

// Recomputes the report from a persisted run directory (predictions.jsonl
// + manifest.json).
nlohmann::json rescore_run_dir(const std::filesystem::path& run_dir);

std::string report_to_csv(const nlohmann::json& report);
std::string report_to_svg(const nlohmann::json& report);

} // namespace lao
