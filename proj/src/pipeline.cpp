#include "lao/pipeline.hpp"

#include "lao/aligner.hpp"
#include "lao/errors.hpp"
#include "lao/parser.hpp"
#include "lao/sha256.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

using nlohmann::json;
namespace fs = std::filesystem;

namespace lao {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

std::string fmt_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

} // namespace

void apply_config_line(RunConfig& config, const std::string& key,
                       const std::string& value) {
  try {
    if (key == "corpus") config.corpus_path = value;
    else if (key == "ontology") config.ontology_path = value;
    else if (key == "templates") config.template_dir = value;
    else if (key == "out") config.out_dir = value;
    else if (key == "replay") config.replay_path = value;
    else if (key == "topics") config.topics = split_csv(value);
    else if (key == "variant") {
      auto v = variant_from_name(value);
      if (!v) throw ConfigError("unknown variant: " + value);
      config.variant = *v;
    } else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "k_shot") config.k_shot = std::stoull(value);
    else if (key == "min_instances") config.min_instances = std::stoull(value);
    else if (key == "min_chars") config.min_chars = std::stoull(value);
    else if (key == "max_items") config.max_items = std::stoull(value);
    else if (key == "limit") config.limit = std::stoull(value);
    else if (key == "live") config.live = (value == "true" || value == "1");
    else if (key == "model_id") config.model.model_id = value;
    else if (key == "temperature") config.model.temperature = std::stod(value);
    else if (key == "max_tokens") config.model.max_tokens = std::stoi(value);
    else if (key == "base_url") config.model.base_url = value;
    else if (key == "align_threshold") config.align_threshold = std::stod(value);
    else if (key == "concurrency") config.concurrency = std::stoi(value);
    else throw ConfigError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value for " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
}

RunConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto stripped = std::string(trim(line));
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + " line " + std::to_string(line_no) +
                        ": expected key = value");
    auto key = std::string(trim(stripped.substr(0, eq)));
    auto value = std::string(trim(stripped.substr(eq + 1)));
    apply_config_line(config, key, value);
  }
  return config;
}

void validate_config(const RunConfig& config) {
  if (!config.seed) throw ConfigError("seed is mandatory");
  if (config.corpus_path.empty() || !fs::exists(config.corpus_path))
    throw ConfigError("corpus path not resolvable: " +
                      config.corpus_path.string());
  if (config.ontology_path.empty() || !fs::exists(config.ontology_path))
    throw ConfigError("ontology path not resolvable: " +
                      config.ontology_path.string());
  if (!config.template_dir.empty() && !fs::exists(config.template_dir))
    throw ConfigError("template dir not resolvable: " +
                      config.template_dir.string());
  if (!config.live) {
    if (config.replay_path.empty())
      throw ConfigError("replay store required unless running live");
    if (!fs::exists(config.replay_path))
      throw ConfigError("replay store not resolvable: " +
                        config.replay_path.string());
  } else if (config.model.base_url.empty()) {
    throw ConfigError("live mode needs base_url");
  }
  if (config.k_shot == 0) throw ConfigError("k_shot must be positive");
  if (config.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (config.align_threshold < 0.0 || config.align_threshold > 1.0)
    throw ConfigError("align_threshold must be in [0, 1]");
}

json config_to_json(const RunConfig& config) {
  // api_key is deliberately not echoed.
  return json{{"corpus", config.corpus_path.string()},
              {"ontology", config.ontology_path.string()},
              {"templates", config.template_dir.string()},
              {"out", config.out_dir.string()},
              {"replay", config.replay_path.string()},
              {"topics", config.topics},
              {"variant", std::string(variant_name(config.variant))},
              {"seed", config.seed ? json(*config.seed) : json(nullptr)},
              {"k_shot", config.k_shot},
              {"min_instances", config.min_instances},
              {"min_chars", config.min_chars},
              {"max_items", config.max_items},
              {"limit", config.limit},
              {"live", config.live},
              {"model_id", config.model.model_id},
              {"temperature", config.model.temperature},
              {"max_tokens", config.model.max_tokens},
              {"base_url", config.model.base_url},
              {"align_threshold", config.align_threshold},
              {"concurrency", config.concurrency}};
}

std::string run_id_for(const RunConfig& config) {
  return sha256_hex(config_to_json(config).dump()).substr(0, 12);
}

RunPlan plan_run(const RunConfig& config, const Ontology& ontology,
                 const Corpus& corpus, const TemplateSet& templates) {
  if (!config.seed) throw ConfigError("seed is mandatory");
  const std::uint64_t seed = *config.seed;

  RunPlan plan;
  plan.filtered = filter_event_types(corpus, ontology, config.min_instances);
  plan.eligible = eligible_sentences(corpus, config.min_chars);

  std::vector<const Topic*> selected;
  if (config.topics.empty()) {
    for (const auto& t : plan.filtered.topics) selected.push_back(&t);
  } else {
    for (const auto& name : config.topics) {
      if (const Topic* t = plan.filtered.find_topic(name)) {
        selected.push_back(t);
      } else if (ontology.find_topic(name)) {
        plan.notices.push_back("topic " + name +
                               " skipped: no event types retained");
      } else {
        throw ConfigError("unknown topic: " + name);
      }
    }
  }

  std::size_t effective_max = config.max_items;
  if (config.limit != 0)
    effective_max = effective_max == 0 ? config.limit
                                       : std::min(effective_max, config.limit);

  for (const Topic* topic : selected) {
    TopicPlan tp;
    tp.topic = *topic;

    std::vector<std::string> query_types;
    for (const auto& type : topic->event_types) {
      try {
        tp.few_shot[type] =
            select_few_shot(corpus, plan.eligible, type, config.k_shot, seed);
        query_types.push_back(type);
      } catch (const ValidationError& e) {
        plan.notices.push_back("event type " + type +
                               " skipped: " + e.what());
      }
    }
    if (query_types.empty()) {
      plan.notices.push_back("topic " + topic->name +
                             " skipped: no event type has exemplars");
      continue;
    }

    // All exemplars in the topic are pooled into one exclusion set, so a
    // sentence shown for one event type is never tested for a sibling.
    std::set<std::size_t> excluded;
    for (const auto& [type, fs_set] : tp.few_shot)
      for (const auto& ex : fs_set.examples) excluded.insert(ex.sentence_index);

    try {
      tp.sequence = build_test_sequence(corpus, tp.topic, plan.eligible,
                                        excluded, seed, effective_max);
    } catch (const ValidationError& e) {
      plan.notices.push_back("topic " + topic->name + " skipped: " + e.what());
      continue;
    }

    const std::size_t topic_index = plan.topics.size();
    for (const auto& type : query_types) {
      const FewShotSet& fs_set = tp.few_shot.at(type);
      PromptSpec spec;
      spec.topic = topic->name;
      spec.event_type = type;
      spec.sibling_types = plan.filtered.sibling_types(tp.topic, type);
      spec.variant = config.variant;
      for (const auto& ex : fs_set.examples) {
        std::vector<EventAnnotation> anns;
        for (std::size_t ai : ex.annotation_indices)
          anns.push_back(corpus.annotations[ai]);
        spec.marked_examples.push_back(
            mark_sentence(corpus.sentences[ex.sentence_index], anns));
      }
      for (std::size_t i = 0; i < tp.sequence.items.size(); ++i) {
        const Sentence& sent = corpus.sentences[tp.sequence.items[i]];
        PromptJob job;
        job.topic_index = topic_index;
        job.topic = topic->name;
        job.event_type = type;
        job.item_index = i;
        job.sentence_index = tp.sequence.items[i];
        job.sent_id = sent.sent_id;
        spec.query_sentence = sent.text;
        job.prompt = templates.render(spec);
        plan.jobs.push_back(std::move(job));
      }
    }
    plan.topics.push_back(std::move(tp));
  }
  return plan;
}

namespace {

struct ItemOutcome {
  std::string status = "ok"; // ok | error | uncached
  std::string error;
  std::string response;
};

CompletionRequest request_for(const RunConfig& config, const PromptJob& job) {
  CompletionRequest req;
  req.prompt = job.prompt;
  req.model_id = config.model.model_id;
  req.temperature = config.model.temperature;
  req.max_tokens = config.model.max_tokens;
  return req;
}

std::vector<ItemOutcome> execute_jobs(const RunConfig& config,
                                      const RunPlan& plan, Gateway& gateway) {
  std::vector<ItemOutcome> outcomes(plan.jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.jobs.size()) break;
      try {
        outcomes[i].response =
            gateway.complete(request_for(config, plan.jobs[i]));
      } catch (const GatewayError& e) {
        outcomes[i].status = e.uncached() ? "uncached" : "error";
        outcomes[i].error = e.what();
      } catch (const std::exception& e) {
        outcomes[i].status = "error";
        outcomes[i].error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(
      static_cast<std::size_t>(config.concurrency), plan.jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // A replay miss is fatal: the offline run cannot be faithful. Name the
  // job so the missing recording is findable.
  for (std::size_t i = 0; i < plan.jobs.size(); ++i) {
    if (outcomes[i].status == "uncached") {
      const PromptJob& job = plan.jobs[i];
      throw GatewayError(outcomes[i].error + " for (topic=" + job.topic +
                             ", event_type=" + job.event_type +
                             ", sentence=" + job.sent_id + ")",
                         /*uncached=*/true);
    }
  }
  return outcomes;
}

json sweep_rows_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"level", r.level},
                   {"tp", r.tp},
                   {"fp", r.fp},
                   {"fn", r.fn},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1}});
  return arr;
}

std::vector<SweepRow> sweep_rows_from_json(const json& arr) {
  std::vector<SweepRow> rows;
  for (const auto& j : arr) {
    SweepRow r;
    r.level = j.at("level").get<int>();
    r.tp = j.at("tp").get<std::size_t>();
    r.fp = j.at("fp").get<std::size_t>();
    r.fn = j.at("fn").get<std::size_t>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    rows.push_back(r);
  }
  return rows;
}

json topic_score_json(const TopicScore& score) {
  const auto& agg = score.aggregate;
  const std::size_t best_idx = static_cast<std::size_t>(5 - agg.best_level);
  json per_type = json::array();
  for (const auto& tr : score.per_type)
    per_type.push_back({{"event_type", tr.event_type},
                        {"total_refs", tr.total_refs},
                        {"num_predictions", tr.num_predictions},
                        {"rows", sweep_rows_json(tr.rows)}});
  json points = json::array();
  for (const auto& p : score.points)
    points.push_back({{"level", p.level},
                      {"tp_rate", p.tp_rate},
                      {"fp_rate", p.fp_rate},
                      {"count", p.count}});
  return json{{"topic", score.topic},
              {"best_level", agg.best_level},
              {"precision", agg.micro[best_idx].precision},
              {"recall", agg.micro[best_idx].recall},
              {"f1", agg.macro_f1[best_idx]},
              {"f1_micro", agg.micro[best_idx].f1},
              {"auc", score.auc ? json(*score.auc) : json(nullptr)},
              {"auc_note", score.auc_note},
              {"macro_f1_by_level", agg.macro_f1},
              {"micro", sweep_rows_json(agg.micro)},
              {"per_type", per_type},
              {"roc_points", points},
              {"notices", score.notices}};
}

// Scores one topic from labeled predictions grouped by event type.
TopicScore score_topic(const std::string& topic_name,
                       const std::vector<std::string>& type_order,
                       const std::map<std::string, std::vector<LabeledPrediction>>& by_type,
                       const std::map<std::string, std::size_t>& total_refs) {
  TopicScore score;
  score.topic = topic_name;
  for (const auto& type : type_order) {
    static const std::vector<LabeledPrediction> kEmpty;
    const auto it = by_type.find(type);
    const auto& labeled = it == by_type.end() ? kEmpty : it->second;
    TypeReport tr;
    tr.event_type = type;
    tr.total_refs = total_refs.count(type) ? total_refs.at(type) : 0;
    tr.num_predictions = labeled.size();
    tr.rows = sweep_metrics(labeled, tr.total_refs);
    score.per_type.push_back(std::move(tr));
    score.labeled.insert(score.labeled.end(), labeled.begin(), labeled.end());
  }
  score.aggregate = aggregate_topic(score.per_type);
  try {
    score.auc = roc_auc(score.labeled);
  } catch (const ScoringError& e) {
    score.auc_note = e.what();
  }
  score.points = roc_points(score.aggregate.micro, score.labeled, &score.notices);
  return score;
}

} // namespace

RunResult run_pipeline(const RunConfig& config) {
  validate_config(config);
  const Ontology ontology = load_ontology(config.ontology_path);
  std::vector<std::string> corpus_warnings;
  const Corpus corpus =
      load_corpus(config.corpus_path, ontology, &corpus_warnings);
  const TemplateSet templates = config.template_dir.empty()
                                    ? TemplateSet::builtin()
                                    : TemplateSet::load_dir(config.template_dir);

  RunPlan plan = plan_run(config, ontology, corpus, templates);

  RunResult result;
  result.run_id = run_id_for(config);
  result.run_dir = config.out_dir / result.run_id;
  fs::remove_all(result.run_dir);
  fs::create_directories(result.run_dir / "prompts");
  fs::create_directories(result.run_dir / "responses");

  Gateway gateway = [&] {
    if (!config.live) return Gateway::replay(RecordStore::load(config.replay_path));
    GatewayConfig gc;
    gc.base_url = config.model.base_url;
    gc.api_key = config.api_key;
    auto sink = std::make_shared<RecordStore>();
    sink->open_append(config.replay_path.empty()
                          ? result.run_dir / "record_store.jsonl"
                          : config.replay_path);
    return Gateway::live(gc, sink);
  }();

  const std::vector<ItemOutcome> outcomes = execute_jobs(config, plan, gateway);

  // Parse + align each response, merging pipe positions per job with the
  // maximum confidence winning a duplicated position.
  struct JobPredictions {
    std::map<std::size_t, int> by_token;
  };
  std::vector<JobPredictions> job_preds(plan.jobs.size());
  json triplet_lines = json::array();
  std::vector<json> manifest_items(plan.jobs.size());
  std::size_t item_errors = 0;

  for (std::size_t i = 0; i < plan.jobs.size(); ++i) {
    const PromptJob& job = plan.jobs[i];
    const ItemOutcome& outcome = outcomes[i];
    const std::string stem = sanitize(job.topic) + "__" +
                             sanitize(job.event_type) + "__";
    char idx_buf[16];
    std::snprintf(idx_buf, sizeof idx_buf, "%03zu", job.item_index);
    const std::string name =
        stem + idx_buf + "__" + sanitize(job.sent_id) + ".txt";
    write_file(result.run_dir / "prompts" / name, job.prompt);

    json item = {{"topic", job.topic},
                 {"event_type", job.event_type},
                 {"index", job.item_index},
                 {"sent_id", job.sent_id},
                 {"prompt_file", "prompts/" + name},
                 {"request_hash", request_hash(request_for(config, job))},
                 {"status", outcome.status}};

    if (outcome.status != "ok") {
      item["error"] = outcome.error;
      ++item_errors;
      manifest_items[i] = std::move(item);
      continue;
    }
    write_file(result.run_dir / "responses" / name, outcome.response);
    item["response_file"] = "responses/" + name;

    ParsedResponse parsed;
    try {
      parsed = parse_response(outcome.response, config.variant);
    } catch (const ParseError& e) {
      item["status"] = "error";
      item["error"] = e.what();
      ++item_errors;
      manifest_items[i] = std::move(item);
      continue;
    }

    const Sentence& sentence = corpus.sentences[job.sentence_index];
    for (const auto& triplet : parsed.triplets) {
      std::vector<std::string> warnings = triplet.warnings;
      int confidence = 3;
      if (triplet.confidence) {
        confidence = *triplet.confidence;
      } else if (config.variant != Variant::NoConf &&
                 !triplet.marked_sentence.empty()) {
        warnings.push_back("no confidence reported; pseudo-confidence 3");
      }
      const AlignmentResult aligned = recover_pipe_positions(
          sentence, triplet.marked_sentence, config.align_threshold);
      for (const auto& w : aligned.warnings) warnings.push_back(w);
      if (aligned.usable) {
        for (std::size_t tok : aligned.token_indices) {
          auto [it, inserted] =
              job_preds[i].by_token.emplace(tok, confidence);
          if (!inserted) it->second = std::max(it->second, confidence);
        }
      }
      triplet_lines.push_back(
          {{"topic", job.topic},
           {"event_type", job.event_type},
           {"index", job.item_index},
           {"sent_id", job.sent_id},
           {"marked_sentence", triplet.marked_sentence},
           {"confidence",
            triplet.confidence ? json(*triplet.confidence) : json(nullptr)},
           {"explanation",
            triplet.explanation ? json(*triplet.explanation) : json(nullptr)},
           {"questions", triplet.questions},
           {"warnings", warnings},
           {"alignment",
            {{"distance", aligned.normalized_distance},
             {"usable", aligned.usable},
             {"token_indices", aligned.token_indices}}}});
    }
    manifest_items[i] = std::move(item);
  }

  // Scoring. References are the annotations on the tested sentences only.
  json report_topics = json::array();
  json manifest_topics = json::array();
  json predictions_lines = json::array();

  for (std::size_t ti = 0; ti < plan.topics.size(); ++ti) {
    const TopicPlan& tp = plan.topics[ti];
    std::set<std::size_t> item_set(tp.sequence.items.begin(),
                                   tp.sequence.items.end());
    std::set<std::string> known_ids;
    for (std::size_t s : tp.sequence.items)
      known_ids.insert(corpus.sentences[s].sent_id);

    std::vector<std::string> type_order;
    for (const auto& type : tp.topic.event_types)
      if (tp.few_shot.count(type)) type_order.push_back(type);

    std::map<std::string, std::vector<Prediction>> preds_by_type;
    for (std::size_t i = 0; i < plan.jobs.size(); ++i) {
      const PromptJob& job = plan.jobs[i];
      if (job.topic_index != ti) continue;
      for (const auto& [tok, conf] : job_preds[i].by_token) {
        Prediction p;
        p.sent_id = job.sent_id;
        p.event_type = job.event_type;
        p.token_index = tok;
        p.confidence = conf;
        preds_by_type[job.event_type].push_back(std::move(p));
      }
    }

    std::map<std::string, std::size_t> total_refs;
    std::map<std::string, std::vector<LabeledPrediction>> labeled_by_type;
    for (const auto& type : type_order) {
      std::vector<RefPhrase> refs;
      for (const auto& ann : corpus.annotations) {
        if (ann.event_type != type) continue;
        if (!item_set.count(ann.sentence_index)) continue;
        refs.push_back({corpus.sentences[ann.sentence_index].sent_id, type,
                        ann.first_token});
      }
      static const std::vector<Prediction> kNone;
      const auto it = preds_by_type.find(type);
      MatchResult matched =
          match_predictions(it == preds_by_type.end() ? kNone : it->second,
                            refs, known_ids);
      total_refs[type] = matched.total_refs;
      labeled_by_type[type] = std::move(matched.labeled);
    }

    TopicScore score =
        score_topic(tp.topic.name, type_order, labeled_by_type, total_refs);
    report_topics.push_back(topic_score_json(score));

    for (const auto& type : type_order)
      for (const auto& lp : labeled_by_type[type])
        predictions_lines.push_back({{"topic", tp.topic.name},
                                     {"event_type", lp.event_type},
                                     {"sent_id", lp.sent_id},
                                     {"token_index", lp.token_index},
                                     {"confidence", lp.confidence},
                                     {"correct", lp.correct}});

    json few_shot = json::object();
    for (const auto& [type, fs_set] : tp.few_shot) {
      json arr = json::array();
      for (const auto& ex : fs_set.examples)
        arr.push_back({{"sent_id", corpus.sentences[ex.sentence_index].sent_id},
                       {"lemma", ex.lemma}});
      few_shot[type] = arr;
    }
    json sequence = json::array();
    for (std::size_t k = 0; k < tp.sequence.items.size(); ++k)
      sequence.push_back(
          {{"sent_id", corpus.sentences[tp.sequence.items[k]].sent_id},
           {"positive", static_cast<bool>(tp.sequence.positives_mask[k])}});
    manifest_topics.push_back({{"name", tp.topic.name},
                               {"event_types", type_order},
                               {"few_shot", few_shot},
                               {"test_sequence", sequence},
                               {"total_refs", total_refs}});
  }

  result.report = json{{"topics", report_topics}};
  result.manifest = json{{"run_id", result.run_id},
                         {"config", config_to_json(config)},
                         {"topics", manifest_topics},
                         {"items", manifest_items},
                         {"notices", plan.notices},
                         {"corpus_warnings", corpus_warnings}};
  result.item_errors = item_errors;

  std::string triplets_text, predictions_text;
  for (const auto& j : triplet_lines) triplets_text += j.dump() + "\n";
  for (const auto& j : predictions_lines) predictions_text += j.dump() + "\n";
  write_file(result.run_dir / "triplets.jsonl", triplets_text);
  write_file(result.run_dir / "predictions.jsonl", predictions_text);
  write_file(result.run_dir / "manifest.json", result.manifest.dump(2) + "\n");
  write_file(result.run_dir / "report.json", result.report.dump(2) + "\n");
  write_file(result.run_dir / "report.csv", report_to_csv(result.report));
  write_file(result.run_dir / "roc.svg", report_to_svg(result.report));
  return result;
}

nlohmann::json sample_splits(const RunConfig& config) {
  validate_config(config);
  const Ontology ontology = load_ontology(config.ontology_path);
  const Corpus corpus = load_corpus(config.corpus_path, ontology);
  const TemplateSet templates = config.template_dir.empty()
                                    ? TemplateSet::builtin()
                                    : TemplateSet::load_dir(config.template_dir);
  RunPlan plan = plan_run(config, ontology, corpus, templates);

  json topics = json::array();
  for (const auto& tp : plan.topics) {
    json few_shot = json::object();
    for (const auto& [type, fs_set] : tp.few_shot) {
      json arr = json::array();
      for (const auto& ex : fs_set.examples)
        arr.push_back({{"sent_id", corpus.sentences[ex.sentence_index].sent_id},
                       {"lemma", ex.lemma}});
      few_shot[type] = arr;
    }
    json sequence = json::array();
    for (std::size_t k = 0; k < tp.sequence.items.size(); ++k)
      sequence.push_back(
          {{"sent_id", corpus.sentences[tp.sequence.items[k]].sent_id},
           {"positive", static_cast<bool>(tp.sequence.positives_mask[k])}});
    topics.push_back({{"name", tp.topic.name},
                      {"few_shot", few_shot},
                      {"test_sequence", sequence}});
  }
  json doc = {{"run_id", run_id_for(config)},
              {"seed", *config.seed},
              {"topics", topics},
              {"notices", plan.notices}};

  const fs::path dir = config.out_dir / run_id_for(config);
  fs::create_directories(dir);
  write_file(dir / "splits.json", doc.dump(2) + "\n");
  return doc;
}

nlohmann::json rescore_run_dir(const fs::path& run_dir) {
  const json manifest = json::parse(read_file(run_dir / "manifest.json"));

  std::map<std::string, std::map<std::string, std::vector<LabeledPrediction>>>
      by_topic_type;
  {
    std::istringstream in(read_file(run_dir / "predictions.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      json j = json::parse(line);
      LabeledPrediction lp;
      lp.sent_id = j.at("sent_id").get<std::string>();
      lp.event_type = j.at("event_type").get<std::string>();
      lp.token_index = j.at("token_index").get<std::size_t>();
      lp.confidence = j.at("confidence").get<int>();
      lp.correct = j.at("correct").get<bool>();
      by_topic_type[j.at("topic").get<std::string>()][lp.event_type].push_back(
          std::move(lp));
    }
  }

  json report_topics = json::array();
  for (const auto& jt : manifest.at("topics")) {
    const std::string name = jt.at("name").get<std::string>();
    std::vector<std::string> type_order;
    for (const auto& t : jt.at("event_types"))
      type_order.push_back(t.get<std::string>());
    std::map<std::string, std::size_t> total_refs;
    for (const auto& [type, n] : jt.at("total_refs").items())
      total_refs[type] = n.get<std::size_t>();
    TopicScore score =
        score_topic(name, type_order, by_topic_type[name], total_refs);
    report_topics.push_back(topic_score_json(score));
  }
  return json{{"topics", report_topics}};
}

std::string report_to_csv(const nlohmann::json& report) {
  std::string out = "topic,series,level,tp,fp,fn,precision,recall,f1\n";
  auto row_line = [&](const std::string& topic, const std::string& series,
                      const SweepRow& r) {
    out += topic + "," + series + "," + std::to_string(r.level) + "," +
           std::to_string(r.tp) + "," + std::to_string(r.fp) + "," +
           std::to_string(r.fn) + "," + fmt_double(r.precision, 6) + "," +
           fmt_double(r.recall, 6) + "," + fmt_double(r.f1, 6) + "\n";
  };
  for (const auto& jt : report.at("topics")) {
    const std::string topic = jt.at("topic").get<std::string>();
    for (const auto& r : sweep_rows_from_json(jt.at("micro")))
      row_line(topic, "micro", r);
    const auto& macro = jt.at("macro_f1_by_level");
    for (std::size_t i = 0; i < macro.size(); ++i)
      out += topic + ",macro," + std::to_string(5 - static_cast<int>(i)) +
             ",,,,,," + fmt_double(macro[i].get<double>(), 6) + "\n";
    for (const auto& jtype : jt.at("per_type")) {
      const std::string series =
          "type:" + jtype.at("event_type").get<std::string>();
      for (const auto& r : sweep_rows_from_json(jtype.at("rows")))
        row_line(topic, series, r);
    }
  }
  return out;
}

std::string report_to_svg(const nlohmann::json& report) {
  // Fixed layout: 440x440 plot area, origin bottom-left, axes [0, 1].
  const double L = 60, T = 20, W = 440, H = 440;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const std::size_t n_colors = sizeof kPalette / sizeof kPalette[0];

  auto px = [&](double x) { return L + x * W; };
  auto py = [&](double y) { return T + (1.0 - y) * H; };

  std::size_t max_count = 0;
  for (const auto& jt : report.at("topics"))
    for (const auto& p : jt.at("roc_points"))
      max_count = std::max(max_count, p.at("count").get<std::size_t>());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" "
         "height=\"560\" viewBox=\"0 0 560 560\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"560\" height=\"560\" fill=\"white\"/>\n";

  // Grid, ticks, axis labels.
  for (int i = 0; i <= 4; ++i) {
    const double v = i * 0.25;
    svg << "<line x1=\"" << fmt_double(px(v), 1) << "\" y1=\"" << fmt_double(py(0), 1)
        << "\" x2=\"" << fmt_double(px(v), 1) << "\" y2=\"" << fmt_double(py(1), 1)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fmt_double(px(0), 1) << "\" y1=\"" << fmt_double(py(v), 1)
        << "\" x2=\"" << fmt_double(px(1), 1) << "\" y2=\"" << fmt_double(py(v), 1)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt_double(px(v), 1) << "\" y=\""
        << fmt_double(py(0) + 18, 1)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">"
        << fmt_double(v, 2) << "</text>\n";
    svg << "<text x=\"" << fmt_double(px(0) - 8, 1) << "\" y=\""
        << fmt_double(py(v) + 4, 1)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">"
        << fmt_double(v, 2) << "</text>\n";
  }
  svg << "<rect x=\"" << fmt_double(px(0), 1) << "\" y=\"" << fmt_double(py(1), 1)
      << "\" width=\"" << fmt_double(W, 1) << "\" height=\"" << fmt_double(H, 1)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  // Chance diagonal.
  svg << "<line x1=\"" << fmt_double(px(0), 1) << "\" y1=\"" << fmt_double(py(0), 1)
      << "\" x2=\"" << fmt_double(px(1), 1) << "\" y2=\"" << fmt_double(py(1), 1)
      << "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
  svg << "<text x=\"" << fmt_double(px(0.5), 1) << "\" y=\""
      << fmt_double(py(0) + 40, 1)
      << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111111\">"
         "False positive rate</text>\n";
  svg << "<text x=\"16\" y=\"" << fmt_double(py(0.5), 1)
      << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111111\" "
         "transform=\"rotate(-90 16 "
      << fmt_double(py(0.5), 1) << ")\">True positive rate</text>\n";

  std::size_t series_index = 0;
  double legend_x = L;
  for (const auto& jt : report.at("topics")) {
    const auto& points = jt.at("roc_points");
    if (points.empty()) continue;
    const char* color = kPalette[series_index % n_colors];

    std::string polyline;
    for (const auto& p : points) {
      if (p.at("count").get<std::size_t>() == 0) continue;
      polyline += fmt_double(px(p.at("fp_rate").get<double>()), 1) + "," +
                  fmt_double(py(p.at("tp_rate").get<double>()), 1) + " ";
    }
    if (!polyline.empty())
      svg << "<polyline points=\"" << polyline
          << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1\" stroke-opacity=\"0.6\"/>\n";

    for (const auto& p : points) {
      const std::size_t count = p.at("count").get<std::size_t>();
      if (count == 0) continue; // nothing at this level
      // Area proportional to count: radius scales with sqrt.
      const double r =
          3.0 + 15.0 * std::sqrt(static_cast<double>(count) /
                                 static_cast<double>(max_count));
      const double cx = px(p.at("fp_rate").get<double>());
      const double cy = py(p.at("tp_rate").get<double>());
      svg << "<circle cx=\"" << fmt_double(cx, 1) << "\" cy=\""
          << fmt_double(cy, 1) << "\" r=\"" << fmt_double(r, 1)
          << "\" fill=\"" << color << "\" fill-opacity=\"0.45\" stroke=\""
          << color << "\"/>\n";
      svg << "<text x=\"" << fmt_double(cx + r + 3, 1) << "\" y=\""
          << fmt_double(cy + 4, 1) << "\" font-size=\"10\" fill=\"" << color
          << "\">" << p.at("level").get<int>() << "</text>\n";
    }

    const std::string name = jt.at("topic").get<std::string>();
    svg << "<rect x=\"" << fmt_double(legend_x, 1) << "\" y=\"524\" width=\"12\" "
           "height=\"12\" fill=\""
        << color << "\"/>\n";
    svg << "<text x=\"" << fmt_double(legend_x + 16, 1)
        << "\" y=\"534\" font-size=\"12\" fill=\"#111111\">" << name
        << "</text>\n";
    legend_x += 16.0 + 7.0 * static_cast<double>(name.size()) + 24.0;
    ++series_index;
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace lao
