#include "lao/corpus.hpp"
#include "lao/errors.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace lao;
using namespace lao::testing;

namespace {

const char* kMiniOntology = R"({"topics":[
  {"name":"Law","event_types":["Law-Enforcement-Arrest","Judicial-Convict"]},
  {"name":"Violence","event_types":["Violence-Kill"]}
]})";

} // namespace

TEST_CASE("load_ontology on the shipped fixture") {
  const Ontology onto = load_ontology(fixtures_dir() / "ontology.json");
  REQUIRE(onto.topics.size() == 3);
  const Topic* disease = onto.find_topic("Disease");
  REQUIRE(disease != nullptr);
  CHECK(disease->event_types.size() == 13);
  CHECK(onto.has_event_type("Impose-Quarantine"));
  CHECK(onto.has_event_type("Law-Enforcement-Arrest"));
  CHECK_FALSE(onto.has_event_type("Nonexistent-Type"));
}

TEST_CASE("load_ontology minimal and error cases") {
  const Ontology one = ontology_from_json(
      R"({"topics":[{"name":"T","event_types":["X"]}]})");
  CHECK(one.topics.size() == 1);

  CHECK_THROWS_AS(ontology_from_json(R"({"topics":[
    {"name":"A","event_types":["Violence-Kill"]},
    {"name":"B","event_types":["Violence-Kill"]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(ontology_from_json(R"({"topics":[{"name":"A","event_types":[]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(ontology_from_json("not json"), ParseError);
}

TEST_CASE("load_corpus maps events to tokens") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  const Corpus corpus = corpus_from_jsonl(
      R"({"doc_id":"d1","sent_id":"s1","text":"Police arrested him.","events":[{"type":"Law-Enforcement-Arrest","first_char":7,"phrase":"arrested"}]})"
      "\n"
      R"({"doc_id":"d1","sent_id":"s2","text":"Nothing happened today.","events":[]})"
      "\n",
      onto);
  REQUIRE(corpus.sentences.size() == 2);
  CHECK(corpus.sentences[0].tokens.size() == 3);
  REQUIRE(corpus.annotations.size() == 1);
  CHECK(corpus.annotations[0].first_token == 1);
  CHECK(corpus.annotations[0].sentence_index == 0);
  CHECK(corpus.annotations_for(1).empty());
}

TEST_CASE("load_corpus snaps mid-token offsets with a warning") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  const std::string text = "Police arrested him.";
  // Oracle: linear scan over the token spans for the containing token.
  const Sentence probe = make_sentence(text);
  const std::size_t mid = 9; // inside "arrested"
  std::size_t expected = SIZE_MAX;
  for (std::size_t t = 0; t < probe.tokens.size(); ++t)
    if (mid >= probe.tokens[t].begin && mid < probe.tokens[t].end) expected = t;
  REQUIRE(expected == 1);

  std::vector<std::string> warnings;
  const Corpus corpus = corpus_from_jsonl(
      R"({"doc_id":"d1","sent_id":"s1","text":"Police arrested him.","events":[{"type":"Law-Enforcement-Arrest","first_char":9}]})"
      "\n",
      onto, &warnings);
  REQUIRE(corpus.annotations.size() == 1);
  CHECK(corpus.annotations[0].first_token == expected);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("mid-token") != std::string::npos);
}

TEST_CASE("load_corpus error paths") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  CHECK_THROWS_AS(
      corpus_from_jsonl(
          R"({"doc_id":"d","sent_id":"s","text":"x y","events":[{"type":"Unknown-Type","first_char":0}]})"
          "\n",
          onto),
      ValidationError);
  CHECK_THROWS_AS(
      corpus_from_jsonl(
          R"({"doc_id":"d","sent_id":"s","text":"x y","events":[{"type":"Violence-Kill","first_char":99}]})"
          "\n",
          onto),
      ValidationError);
  CHECK_THROWS_AS(corpus_from_jsonl("{broken\n", onto), ParseError);
}

TEST_CASE("filter_event_types threshold is inclusive") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  std::string lines;
  // 10 instances of Arrest, 9 of Convict.
  for (int i = 0; i < 10; ++i)
    lines += R"({"doc_id":"d","sent_id":"a)" + std::to_string(i) +
             R"(","text":"Police arrested man )" + std::to_string(i) +
             R"( downtown.","events":[{"type":"Law-Enforcement-Arrest","first_char":7}]})"
             "\n";
  for (int i = 0; i < 9; ++i)
    lines += R"({"doc_id":"d","sent_id":"c)" + std::to_string(i) +
             R"(","text":"Court convicted man )" + std::to_string(i) +
             R"( quickly.","events":[{"type":"Judicial-Convict","first_char":6}]})"
             "\n";
  const Corpus corpus = corpus_from_jsonl(lines, onto);

  const Ontology kept = filter_event_types(corpus, onto, 10);
  REQUIRE(kept.topics.size() == 1); // Violence drops out entirely
  CHECK(kept.topics[0].name == "Law");
  REQUIRE(kept.topics[0].event_types.size() == 1);
  CHECK(kept.topics[0].event_types[0] == "Law-Enforcement-Arrest");

  SUBCASE("idempotent") {
    const Ontology twice = filter_event_types(corpus, kept, 10);
    CHECK(twice.topics.size() == kept.topics.size());
    CHECK(twice.topics[0].event_types == kept.topics[0].event_types);
  }
  SUBCASE("all types under threshold leaves an empty ontology") {
    const Ontology none = filter_event_types(corpus, onto, 100);
    CHECK(none.topics.empty());
  }
}

TEST_CASE("eligible_sentences boundary at min_chars") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  const std::string s24(24, 'x');
  const std::string s25(25, 'y');
  const Corpus corpus = corpus_from_jsonl(
      R"({"doc_id":"d","sent_id":"s1","text":")" + s24 + R"(","events":[]})" "\n" +
      R"({"doc_id":"d","sent_id":"s2","text":")" + s25 + R"(","events":[]})" "\n",
      onto);
  const auto kept = eligible_sentences(corpus, 25);
  REQUIRE(kept.size() == 1);
  CHECK(corpus.sentences[kept[0]].sent_id == "s2");

  const Corpus empty = corpus_from_jsonl("", onto);
  CHECK(eligible_sentences(empty, 25).empty());
}

TEST_CASE("eligible_sentences counts scalar values not bytes") {
  const Ontology onto = ontology_from_json(kMiniOntology);
  // 24 scalars, each 2 bytes: over 25 in bytes, under in scalars.
  std::string text;
  for (int i = 0; i < 24; ++i) text += "\xc3\xa9";
  const Corpus corpus = corpus_from_jsonl(
      R"({"doc_id":"d","sent_id":"s1","text":")" + text + R"(","events":[]})" "\n",
      onto);
  CHECK(eligible_sentences(corpus, 25).empty());
}

TEST_CASE("corpus save and load round-trips") {
  const Ontology onto = load_ontology(fixtures_dir() / "ontology.json");
  const Corpus corpus =
      load_corpus(fixtures_dir() / "corpus.jsonl", onto);
  const auto path = write_temp("roundtrip", "");
  save_corpus(corpus, path);
  const Corpus again = load_corpus(path, onto);

  REQUIRE(again.sentences.size() == corpus.sentences.size());
  REQUIRE(again.annotations.size() == corpus.annotations.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    CHECK(again.sentences[i].sent_id == corpus.sentences[i].sent_id);
    CHECK(again.sentences[i].text == corpus.sentences[i].text);
    CHECK(again.sentences[i].tokens == corpus.sentences[i].tokens);
  }
  for (std::size_t i = 0; i < corpus.annotations.size(); ++i) {
    CHECK(again.annotations[i].sentence_index ==
          corpus.annotations[i].sentence_index);
    CHECK(again.annotations[i].event_type == corpus.annotations[i].event_type);
    CHECK(again.annotations[i].first_token ==
          corpus.annotations[i].first_token);
  }
}

TEST_CASE("annotations still resolve after filtering stages") {
  const Ontology onto = load_ontology(fixtures_dir() / "ontology.json");
  const Corpus corpus = load_corpus(fixtures_dir() / "corpus.jsonl", onto);
  const Ontology kept = filter_event_types(corpus, onto, 10);
  const auto eligible = eligible_sentences(corpus, 25);

  std::set<std::size_t> eligible_set(eligible.begin(), eligible.end());
  for (const auto& ann : corpus.annotations) {
    CHECK(ann.sentence_index < corpus.sentences.size());
    CHECK(ann.first_token < corpus.sentence_of(ann).tokens.size());
    // Retained types must only reference sentences that still exist.
    if (kept.has_event_type(ann.event_type) &&
        eligible_set.count(ann.sentence_index)) {
      CHECK(corpus.sentences[ann.sentence_index].char_count() >= 25);
    }
  }
}
