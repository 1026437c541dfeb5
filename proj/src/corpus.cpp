#include "lao/corpus.hpp"

#include "lao/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using nlohmann::json;

namespace lao {

bool Ontology::has_event_type(const std::string& type) const {
  for (const auto& t : topics)
    for (const auto& et : t.event_types)
      if (et == type) return true;
  return false;
}

const Topic* Ontology::find_topic(const std::string& name) const {
  for (const auto& t : topics)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<std::string> Ontology::sibling_types(
    const Topic& topic, const std::string& event_type) const {
  std::vector<std::string> out;
  for (const auto& et : topic.event_types)
    if (et != event_type) out.push_back(et);
  return out;
}

std::string Sentence::token_text(std::size_t i) const {
  const TokenSpan& s = tokens.at(i);
  return encode_utf8(std::u32string_view(chars).substr(s.begin, s.end - s.begin));
}

std::vector<std::size_t> Corpus::annotations_for(std::size_t sentence_index) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < annotations.size(); ++i)
    if (annotations[i].sentence_index == sentence_index) out.push_back(i);
  return out;
}

namespace {

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return j;
}

} // namespace

Ontology load_ontology(const std::filesystem::path& path) {
  json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("topics") || !j["topics"].is_array())
    throw ParseError(path.string() + ": expected {\"topics\": [...]}");

  Ontology onto;
  std::set<std::string> seen_types;
  std::set<std::string> seen_topics;
  for (const auto& jt : j["topics"]) {
    if (!jt.is_object() || !jt.contains("name") || !jt.contains("event_types"))
      throw ParseError(path.string() + ": topic needs \"name\" and \"event_types\"");
    Topic topic;
    topic.name = jt["name"].get<std::string>();
    if (!seen_topics.insert(topic.name).second)
      throw ValidationError("duplicate topic name: " + topic.name);
    for (const auto& jet : jt["event_types"]) {
      std::string et = jet.get<std::string>();
      if (!seen_types.insert(et).second)
        throw ValidationError("duplicate event type across ontology: " + et);
      topic.event_types.push_back(std::move(et));
    }
    if (topic.event_types.empty())
      throw ValidationError("topic has no event types: " + topic.name);
    onto.topics.push_back(std::move(topic));
  }
  return onto;
}

Corpus load_corpus(const std::filesystem::path& path, const Ontology& ontology,
                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": " + e.what());
    }

    Sentence sent;
    sent.doc_id = j.at("doc_id").get<std::string>();
    sent.sent_id = j.at("sent_id").get<std::string>();
    sent.text = j.at("text").get<std::string>();
    sent.chars = decode_utf8(sent.text);
    sent.tokens = tokenize(sent.chars);
    if (!seen_ids.insert(sent.sent_id).second)
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": duplicate sent_id " + sent.sent_id);

    const std::size_t sent_index = corpus.sentences.size();
    if (j.contains("events")) {
      for (const auto& je : j["events"]) {
        EventAnnotation ann;
        ann.sentence_index = sent_index;
        ann.event_type = je.at("type").get<std::string>();
        if (!ontology.has_event_type(ann.event_type))
          throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                                ": unknown event type " + ann.event_type);
        const auto first_char = je.at("first_char").get<long long>();
        if (first_char < 0 ||
            static_cast<std::size_t>(first_char) >= sent.chars.size())
          throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                                ": first_char " + std::to_string(first_char) +
                                " out of bounds for sent " + sent.sent_id);
        ann.phrase_text = je.value("phrase", std::string());

        // Locate the token containing first_char; a mid-token offset
        // snaps to that token, a whitespace offset to the next token.
        const std::size_t pos = static_cast<std::size_t>(first_char);
        std::optional<std::size_t> tok;
        for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
          if (pos < sent.tokens[t].begin) {
            tok = t;
            if (warnings)
              warnings->push_back("sent " + sent.sent_id + ": first_char " +
                                  std::to_string(pos) +
                                  " falls in whitespace; snapped to token " +
                                  std::to_string(t));
            break;
          }
          if (pos < sent.tokens[t].end) {
            tok = t;
            if (pos != sent.tokens[t].begin && warnings)
              warnings->push_back("sent " + sent.sent_id + ": first_char " +
                                  std::to_string(pos) +
                                  " is mid-token; snapped to token " +
                                  std::to_string(t));
            break;
          }
        }
        if (!tok)
          throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                                ": first_char " + std::to_string(pos) +
                                " lies after the last token of sent " + sent.sent_id);
        ann.first_token = *tok;
        corpus.annotations.push_back(std::move(ann));
      }
    }
    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& s = corpus.sentences[i];
    json events = json::array();
    for (const auto& a : corpus.annotations) {
      if (a.sentence_index != i) continue;
      events.push_back({{"type", a.event_type},
                        {"first_char", s.tokens[a.first_token].begin},
                        {"phrase", a.phrase_text}});
    }
    json j = {{"doc_id", s.doc_id},
              {"sent_id", s.sent_id},
              {"text", s.text},
              {"events", events}};
    out << j.dump() << "\n";
  }
}

Ontology filter_event_types(const Corpus& corpus, const Ontology& ontology,
                            std::size_t min_instances) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : corpus.annotations) ++counts[a.event_type];

  Ontology out;
  for (const auto& topic : ontology.topics) {
    Topic kept;
    kept.name = topic.name;
    for (const auto& et : topic.event_types)
      if (counts[et] >= min_instances) kept.event_types.push_back(et);
    if (!kept.event_types.empty()) out.topics.push_back(std::move(kept));
  }
  return out;
}

std::vector<std::size_t> eligible_sentences(const Corpus& corpus,
                                            std::size_t min_chars) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
    if (corpus.sentences[i].char_count() >= min_chars) out.push_back(i);
  return out;
}

} // namespace lao
