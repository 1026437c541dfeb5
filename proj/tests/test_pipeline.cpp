#include "lao/errors.hpp"
#include "lao/gateway.hpp"
#include "lao/pipeline.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>

using namespace lao;
using namespace lao::testing;
using nlohmann::json;

TEST_CASE("config file parsing and CLI-style overrides") {
  const auto path = write_temp("config",
                               "# pipeline settings\n"
                               "corpus = corpus.jsonl\n"
                               "ontology = onto.json\n"
                               "variant = no_conf\n"
                               "seed = 99\n"
                               "topics = Law, Disease\n"
                               "temperature = 0.25\n"
                               "max_items = 40\n");
  RunConfig config = load_config_file(path);
  CHECK(config.corpus_path == "corpus.jsonl");
  CHECK(config.variant == Variant::NoConf);
  CHECK(config.seed == 99);
  CHECK(config.topics == std::vector<std::string>{"Law", "Disease"});
  CHECK(config.model.temperature == 0.25);
  CHECK(config.max_items == 40);

  apply_config_line(config, "variant", "full");
  CHECK(config.variant == Variant::Full);
  CHECK_THROWS_AS(apply_config_line(config, "bogus", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_line(config, "seed", "not-a-number"),
                  ConfigError);
  CHECK_THROWS_AS(apply_config_line(config, "variant", "mystery"), ConfigError);

  const auto broken = write_temp("config", "corpus corpus.jsonl\n");
  CHECK_THROWS_AS(load_config_file(broken), ConfigError);
}

TEST_CASE("validate_config rejects unusable configs") {
  RunConfig config = fixture_run_config(Variant::Full, temp_dir("validate"));
  validate_config(config); // fixture config is fine

  SUBCASE("missing seed") {
    config.seed.reset();
    CHECK_THROWS_WITH_AS(validate_config(config), doctest::Contains("seed"),
                         ConfigError);
  }
  SUBCASE("missing corpus") {
    config.corpus_path = "/nonexistent/corpus.jsonl";
    CHECK_THROWS_AS(validate_config(config), ConfigError);
  }
  SUBCASE("replay mode needs a store") {
    config.replay_path.clear();
    CHECK_THROWS_AS(validate_config(config), ConfigError);
  }
  SUBCASE("unknown topic is a config error at plan time") {
    const Ontology onto = load_ontology(config.ontology_path);
    const Corpus corpus = load_corpus(config.corpus_path, onto);
    config.topics = {"Astronomy"};
    CHECK_THROWS_AS(plan_run(config, onto, corpus, TemplateSet::builtin()),
                    ConfigError);
  }
}

TEST_CASE("run ids are deterministic and config-sensitive") {
  RunConfig a = fixture_run_config(Variant::Full, "out");
  RunConfig b = fixture_run_config(Variant::Full, "out");
  CHECK(run_id_for(a) == run_id_for(b));
  b.seed = 8;
  CHECK(run_id_for(a) != run_id_for(b));
  RunConfig c = fixture_run_config(Variant::NoConf, "out");
  CHECK(run_id_for(a) != run_id_for(c));
}

TEST_CASE("plan_run honors exclusions and enumerates jobs") {
  const RunConfig config = fixture_run_config(Variant::Full, "out");
  const Ontology onto = load_ontology(config.ontology_path);
  const Corpus corpus = load_corpus(config.corpus_path, onto);
  const RunPlan plan = plan_run(config, onto, corpus, TemplateSet::builtin());

  REQUIRE(plan.topics.size() == 3);
  std::size_t expected_jobs = 0;
  for (const auto& tp : plan.topics) {
    std::set<std::size_t> exemplars;
    for (const auto& [type, fs] : tp.few_shot) {
      CHECK(fs.examples.size() <= config.k_shot);
      for (const auto& ex : fs.examples) exemplars.insert(ex.sentence_index);
    }
    for (std::size_t item : tp.sequence.items)
      CHECK(exemplars.count(item) == 0);
    expected_jobs += tp.few_shot.size() * tp.sequence.items.size();
  }
  CHECK(plan.jobs.size() == expected_jobs);
  CHECK(plan.jobs.size() == 140); // 5 event types x 28 items

  // limit truncates each topic's sequence
  RunConfig limited = config;
  limited.limit = 8;
  const RunPlan small = plan_run(limited, onto, corpus, TemplateSet::builtin());
  for (const auto& tp : small.topics) CHECK(tp.sequence.items.size() <= 8);
}

TEST_CASE("replay run reproduces the golden report byte for byte") {
  const auto out = temp_dir("e2e");
  const RunConfig config = fixture_run_config(Variant::Full, out);

  const RunResult first = run_pipeline(config);
  const std::string first_bytes = read_file(first.run_dir / "report.json");
  const RunResult second = run_pipeline(config);
  const std::string second_bytes = read_file(second.run_dir / "report.json");
  CHECK(first_bytes == second_bytes);

  const json golden = json::parse(read_file(fixtures_dir() / "golden_report.json"));
  CHECK(json::parse(first_bytes) == golden);
  CHECK(first.report == golden);

  SUBCASE("rescoring the persisted run matches the original report") {
    const json rescored = rescore_run_dir(first.run_dir);
    CHECK(rescored == golden);
  }
  SUBCASE("manifest items and response files are in bijection") {
    const json manifest =
        json::parse(read_file(first.run_dir / "manifest.json"));
    std::set<std::string> referenced;
    for (const auto& item : manifest.at("items")) {
      CHECK(item.at("status") == "ok");
      const std::string file = item.at("response_file").get<std::string>();
      CHECK(referenced.insert(file).second); // exactly one item per file
      CHECK(std::filesystem::exists(first.run_dir / file));
    }
    std::size_t on_disk = 0;
    for (const auto& entry : std::filesystem::directory_iterator(
             first.run_dir / "responses"))
      if (entry.is_regular_file()) ++on_disk;
    CHECK(on_disk == referenced.size());
    CHECK(on_disk == manifest.at("items").size());
  }
  SUBCASE("every sweep row nests correctly in csv") {
    const std::string csv = read_file(first.run_dir / "report.csv");
    CHECK(csv.find("topic,series,level,tp,fp,fn,precision,recall,f1") == 0);
    CHECK(csv.find("Law,micro,5,") != std::string::npos);
    CHECK(csv.find("Law,macro,5,") != std::string::npos);
    CHECK(csv.find("type:Violence-Kill") != std::string::npos);
  }
  SUBCASE("svg overlays all three topic series") {
    const std::string svg = read_file(first.run_dir / "roc.svg");
    CHECK(svg.find(">Law<") != std::string::npos);
    CHECK(svg.find(">Violence<") != std::string::npos);
    CHECK(svg.find(">Disease<") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos); // chance line
  }
}

TEST_CASE("no_conf replay collapses the sweep to pseudo-confidence 3") {
  const auto out = temp_dir("noconf");
  const RunConfig config = fixture_run_config(Variant::NoConf, out);
  const RunResult result = run_pipeline(config);
  for (const auto& jt : result.report.at("topics")) {
    // every prediction sits at level 3, so the AUC is chance
    REQUIRE_FALSE(jt.at("auc").is_null());
    CHECK(jt.at("auc").get<double>() == 0.5);
    for (const auto& p : jt.at("roc_points"))
      if (p.at("level").get<int>() != 3)
        CHECK(p.at("count").get<std::size_t>() == 0);
  }
}

TEST_CASE("replay miss fails naming the topic, event type and sentence") {
  // Rebuild the store without one record.
  const RecordStore full = RecordStore::load(fixtures_dir() / "replay_store.jsonl");
  REQUIRE(full.records().size() > 20);
  std::vector<CompletionRecord> pruned;
  const CompletionRecord dropped = full.records()[17];
  for (std::size_t i = 0; i < full.records().size(); ++i)
    if (i != 17) pruned.push_back(full.records()[i]);
  const auto store_path = write_temp("pruned_store", "");
  RecordStore::write_all(store_path, pruned);

  const auto out = temp_dir("miss");
  RunConfig config = fixture_run_config(Variant::Full, out);
  config.replay_path = store_path;

  // The job whose hash was dropped names the expected key.
  const Ontology onto = load_ontology(config.ontology_path);
  const Corpus corpus = load_corpus(config.corpus_path, onto);
  const RunPlan plan = plan_run(config, onto, corpus, TemplateSet::builtin());
  const PromptJob* missing = nullptr;
  for (const auto& job : plan.jobs) {
    CompletionRequest req;
    req.prompt = job.prompt;
    req.model_id = config.model.model_id;
    req.temperature = config.model.temperature;
    req.max_tokens = config.model.max_tokens;
    if (request_hash(req) == dropped.request_hash) {
      missing = &job;
      break;
    }
  }
  REQUIRE(missing != nullptr);

  try {
    run_pipeline(config);
    FAIL("expected an uncached-request failure");
  } catch (const GatewayError& e) {
    const std::string what = e.what();
    CHECK(e.uncached());
    CHECK(what.find("uncached request") != std::string::npos);
    CHECK(what.find("topic=" + missing->topic) != std::string::npos);
    CHECK(what.find("event_type=" + missing->event_type) != std::string::npos);
    CHECK(what.find("sentence=" + missing->sent_id) != std::string::npos);
  }
}

TEST_CASE("replay never touches the network") {
  const auto out = temp_dir("offline");
  RunConfig config = fixture_run_config(Variant::Full, out);
  // An unroutable endpoint: any connection attempt would fail the run.
  config.model.base_url = "http://127.0.0.1:9";
  const RunResult result = run_pipeline(config);
  CHECK(result.report.at("topics").size() == 3);
  CHECK(result.item_errors == 0);
}

TEST_CASE("sample_splits persists the plan without a backend") {
  const auto out = temp_dir("splits");
  RunConfig config = fixture_run_config(Variant::Full, out);
  const json doc = sample_splits(config);
  CHECK(doc.at("topics").size() == 3);
  const auto path = out / doc.at("run_id").get<std::string>() / "splits.json";
  CHECK(std::filesystem::exists(path));
  const json reread = json::parse(read_file(path));
  CHECK(reread == doc);
  for (const auto& jt : doc.at("topics")) {
    CHECK_FALSE(jt.at("few_shot").empty());
    CHECK_FALSE(jt.at("test_sequence").empty());
    // the 1:3 cycle shows in the persisted mask
    const auto& seq = jt.at("test_sequence");
    for (std::size_t i = 0; i < seq.size(); ++i)
      CHECK(seq[i].at("positive").get<bool>() == (i % 4 == 0));
  }
}

TEST_CASE("csv and svg emitters follow the report document") {
  SUBCASE("a two-level report yields two data rows per series") {
    json doc = {{"topics",
                 json::array(
                     {{{"topic", "T"},
                       {"best_level", 5},
                       {"precision", 1.0},
                       {"recall", 0.5},
                       {"f1", 0.6},
                       {"f1_micro", 0.6},
                       {"auc", nullptr},
                       {"auc_note", "degenerate"},
                       {"macro_f1_by_level", json::array({0.6, 0.5})},
                       {"micro",
                        json::array({{{"level", 5}, {"tp", 1}, {"fp", 0},
                                      {"fn", 1}, {"precision", 1.0},
                                      {"recall", 0.5}, {"f1", 0.6}},
                                     {{"level", 4}, {"tp", 1}, {"fp", 1},
                                      {"fn", 1}, {"precision", 0.5},
                                      {"recall", 0.5}, {"f1", 0.5}}})},
                       {"per_type", json::array()},
                       {"roc_points", json::array()},
                       {"notices", json::array()}}})}};
    const std::string csv = report_to_csv(doc);
    std::size_t micro_rows = 0, macro_rows = 0;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("T,micro,", 0) == 0) ++micro_rows;
      if (line.rfind("T,macro,", 0) == 0) ++macro_rows;
    }
    CHECK(micro_rows == 2);
    CHECK(macro_rows == 2);
  }
  SUBCASE("zero-count roc points are omitted from the svg") {
    json doc = {{"topics",
                 json::array(
                     {{{"topic", "T"},
                       {"roc_points",
                        json::array({{{"level", 5}, {"tp_rate", 0.5},
                                      {"fp_rate", 0.25}, {"count", 4}},
                                     {{"level", 4}, {"tp_rate", 1.0},
                                      {"fp_rate", 1.0}, {"count", 0}}})}}})}};
    const std::string svg = report_to_svg(doc);
    CHECK(svg.find("<circle") != std::string::npos);
    // exactly one circle: the zero-count point is dropped
    std::size_t circles = 0, at = 0;
    while ((at = svg.find("<circle", at)) != std::string::npos) {
      ++circles;
      at += 7;
    }
    CHECK(circles == 1);
  }
}

TEST_CASE("cli smoke test over the fixture run") {
  const auto out = temp_dir("cli");
  const std::string binary = std::string(LAO_BINARY);
  const std::string common =
      " --corpus " + (fixtures_dir() / "corpus.jsonl").string() +
      " --ontology " + (fixtures_dir() / "ontology.json").string() +
      " --replay " + (fixtures_dir() / "replay_store.jsonl").string() +
      " --seed 7 --max-items 28 --out " + out.string();

  CHECK(std::system((binary + " validate" + common + " > /dev/null").c_str()) == 0);
  CHECK(std::system((binary + " run" + common + " > /dev/null").c_str()) == 0);

  const RunConfig config = fixture_run_config(Variant::Full, out);
  const auto run_dir = out / run_id_for(config);
  REQUIRE(std::filesystem::exists(run_dir / "report.json"));
  CHECK(json::parse(read_file(run_dir / "report.json")) ==
        json::parse(read_file(fixtures_dir() / "golden_report.json")));

  CHECK(std::system((binary + " score --run-dir " + run_dir.string() +
                     " > /dev/null")
                        .c_str()) == 0);
  CHECK(std::system((binary + " report --run-dir " + run_dir.string() +
                     " --format svg > /dev/null")
                        .c_str()) == 0);
  CHECK(std::system((binary + " sample" + common + " > /dev/null").c_str()) == 0);
  CHECK(std::filesystem::exists(run_dir / "splits.json"));

  // a bad config fails loudly
  CHECK(std::system((binary + " run --corpus /nope.jsonl --seed 1 "
                     "2> /dev/null")
                        .c_str()) != 0);
}
