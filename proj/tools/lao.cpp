#include "lao/corpus.hpp"
#include "lao/errors.hpp"
#include "lao/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

struct CommonOpts {
  std::string config_file;
  std::string corpus, ontology, templates, out, replay;
  std::vector<std::string> topics;
  std::string variant;
  std::string seed;
  std::string limit, max_items, k_shot, min_instances, min_chars;
  std::string model_id, temperature, max_tokens, base_url;
  std::string align_threshold, concurrency;
  bool live = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_file, "flat key = value config file");
  cmd->add_option("--corpus", o.corpus, "corpus JSONL path");
  cmd->add_option("--ontology", o.ontology, "ontology JSON path");
  cmd->add_option("--templates", o.templates, "prompt template directory");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--replay", o.replay, "completion record store (JSONL)");
  cmd->add_option("--topic", o.topics, "topic to run (repeatable)");
  cmd->add_option("--variant", o.variant,
                  "full|conf_only|conventional_conf|no_conf|no_guess");
  cmd->add_option("--seed", o.seed, "sampling seed (mandatory)");
  cmd->add_option("--limit", o.limit, "truncate each test sequence");
  cmd->add_option("--max-items", o.max_items, "cap test sequence length");
  cmd->add_option("--k-shot", o.k_shot, "few-shot examples per prompt");
  cmd->add_option("--min-instances", o.min_instances,
                  "event-type retention threshold");
  cmd->add_option("--min-chars", o.min_chars, "sentence eligibility threshold");
  cmd->add_option("--model-id", o.model_id, "model identifier");
  cmd->add_option("--temperature", o.temperature, "decoding temperature");
  cmd->add_option("--max-tokens", o.max_tokens, "completion token cap");
  cmd->add_option("--base-url", o.base_url, "chat-completion endpoint base");
  cmd->add_option("--align-threshold", o.align_threshold,
                  "alignment distance cutoff");
  cmd->add_option("--concurrency", o.concurrency, "in-flight request cap");
  cmd->add_flag("--live", o.live, "query the live endpoint instead of replay");
}

lao::RunConfig build_config(const CommonOpts& o) {
  lao::RunConfig config;
  if (!o.config_file.empty()) config = lao::load_config_file(o.config_file);
  auto set = [&](const char* key, const std::string& value) {
    if (!value.empty()) lao::apply_config_line(config, key, value);
  };
  set("corpus", o.corpus);
  set("ontology", o.ontology);
  set("templates", o.templates);
  set("out", o.out);
  set("replay", o.replay);
  if (!o.topics.empty()) config.topics = o.topics;
  set("variant", o.variant);
  set("seed", o.seed);
  set("limit", o.limit);
  set("max_items", o.max_items);
  set("k_shot", o.k_shot);
  set("min_instances", o.min_instances);
  set("min_chars", o.min_chars);
  set("model_id", o.model_id);
  set("temperature", o.temperature);
  set("max_tokens", o.max_tokens);
  set("base_url", o.base_url);
  set("align_threshold", o.align_threshold);
  set("concurrency", o.concurrency);
  if (o.live) config.live = true;
  if (const char* key = std::getenv("LAO_API_KEY")) config.api_key = key;
  return config;
}

int cmd_validate(const CommonOpts& o) {
  lao::RunConfig config = build_config(o);
  lao::validate_config(config);
  const lao::Ontology ontology = lao::load_ontology(config.ontology_path);
  std::vector<std::string> warnings;
  const lao::Corpus corpus =
      lao::load_corpus(config.corpus_path, ontology, &warnings);
  const lao::Ontology retained =
      lao::filter_event_types(corpus, ontology, config.min_instances);
  const auto eligible = lao::eligible_sentences(corpus, config.min_chars);

  std::cout << "ontology: " << ontology.topics.size() << " topics\n";
  std::cout << "corpus: " << corpus.sentences.size() << " sentences, "
            << corpus.annotations.size() << " annotations\n";
  std::cout << "eligible sentences (>= " << config.min_chars
            << " chars): " << eligible.size() << "\n";
  for (const auto& topic : retained.topics) {
    std::cout << "retained topic " << topic.name << ":";
    for (const auto& t : topic.event_types) std::cout << " " << t;
    std::cout << "\n";
  }
  for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
  std::cout << "run_id: " << lao::run_id_for(config) << "\n";
  return 0;
}

int cmd_sample(const CommonOpts& o) {
  lao::RunConfig config = build_config(o);
  const auto doc = lao::sample_splits(config);
  std::cout << "splits written for run " << doc.at("run_id").get<std::string>()
            << " under " << (config.out_dir / doc.at("run_id").get<std::string>()).string()
            << "\n";
  return 0;
}

int cmd_run(const CommonOpts& o) {
  lao::RunConfig config = build_config(o);
  const lao::RunResult result = lao::run_pipeline(config);
  std::cout << "run " << result.run_id << " complete: artifacts under "
            << result.run_dir.string() << "\n";
  for (const auto& jt : result.report.at("topics")) {
    std::cout << jt.at("topic").get<std::string>() << ": best level "
              << jt.at("best_level").get<int>() << ", P "
              << jt.at("precision").get<double>() << ", R "
              << jt.at("recall").get<double>() << ", F1 "
              << jt.at("f1").get<double>() << ", AUC ";
    if (jt.at("auc").is_null())
      std::cout << "n/a (" << jt.at("auc_note").get<std::string>() << ")";
    else
      std::cout << jt.at("auc").get<double>();
    std::cout << "\n";
  }
  if (result.item_errors > 0)
    std::cout << result.item_errors
              << " item(s) recorded errors; see manifest.json\n";
  return 0;
}

int cmd_score(const std::string& run_dir, const std::string& out_dir) {
  const auto report = lao::rescore_run_dir(run_dir);
  const std::filesystem::path dir = out_dir.empty() ? run_dir : out_dir;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json", std::ios::binary)
      << report.dump(2) << "\n";
  std::ofstream(dir / "report.csv", std::ios::binary)
      << lao::report_to_csv(report);
  std::ofstream(dir / "roc.svg", std::ios::binary)
      << lao::report_to_svg(report);
  std::cout << "rescored " << run_dir << " -> " << dir.string() << "\n";
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format,
               const std::string& out_dir) {
  std::ifstream in(std::filesystem::path(run_dir) / "report.json");
  if (!in) throw lao::ConfigError("no report.json under " + run_dir);
  nlohmann::json report;
  in >> report;
  const std::filesystem::path dir = out_dir.empty() ? run_dir : out_dir;
  std::filesystem::create_directories(dir);
  if (format == "json") {
    std::ofstream(dir / "report.json", std::ios::binary)
        << report.dump(2) << "\n";
  } else if (format == "csv") {
    std::ofstream(dir / "report.csv", std::ios::binary)
        << lao::report_to_csv(report);
  } else if (format == "svg") {
    std::ofstream(dir / "roc.svg", std::ios::binary)
        << lao::report_to_svg(report);
  } else {
    throw lao::ConfigError("unknown format: " + format);
  }
  std::cout << format << " report written under " << dir.string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot event detection pipeline with confidence sweeps"};
  app.require_subcommand(1);

  CommonOpts validate_opts, sample_opts, run_opts;
  CLI::App* validate =
      app.add_subcommand("validate", "check config, ontology and corpus");
  add_common(validate, validate_opts);
  CLI::App* sample =
      app.add_subcommand("sample", "persist few-shot and test splits");
  add_common(sample, sample_opts);
  CLI::App* run = app.add_subcommand("run", "execute the full pipeline");
  add_common(run, run_opts);

  std::string score_run_dir, score_out;
  CLI::App* score =
      app.add_subcommand("score", "rescore persisted predictions");
  score->add_option("--run-dir", score_run_dir, "run directory")->required();
  score->add_option("--out", score_out, "output directory (default run dir)");

  std::string report_run_dir, report_format = "json", report_out;
  CLI::App* report =
      app.add_subcommand("report", "emit a persisted report in a format");
  report->add_option("--run-dir", report_run_dir, "run directory")->required();
  report->add_option("--format", report_format, "json|csv|svg");
  report->add_option("--out", report_out, "output directory (default run dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(validate_opts);
    if (sample->parsed()) return cmd_sample(sample_opts);
    if (run->parsed()) return cmd_run(run_opts);
    if (score->parsed()) return cmd_score(score_run_dir, score_out);
    if (report->parsed()) return cmd_report(report_run_dir, report_format, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
