#pragma once

#include "lao/text.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lao {

struct Topic {
  std::string name;
  std::vector<std::string> event_types;
};

// Event-type names are unique across the whole ontology and every topic
// carries at least one type; load_ontology enforces both.
struct Ontology {
  std::vector<Topic> topics;

  bool has_event_type(const std::string& type) const;
  const Topic* find_topic(const std::string& name) const;
  // The topic's other event types, in ontology order.
  std::vector<std::string> sibling_types(const Topic& topic,
                                         const std::string& event_type) const;
};

struct Sentence {
  std::string doc_id;
  std::string sent_id;
  std::string text;      // UTF-8
  std::u32string chars;  // decoded once at load
  std::vector<TokenSpan> tokens;

  std::size_t char_count() const { return chars.size(); }
  std::string token_text(std::size_t i) const;
};

struct EventAnnotation {
  std::size_t sentence_index = 0; // into Corpus::sentences
  std::string event_type;
  std::size_t first_token = 0;
  std::string phrase_text;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::vector<EventAnnotation> annotations;

  const Sentence& sentence_of(const EventAnnotation& a) const {
    return sentences[a.sentence_index];
  }
  std::vector<std::size_t> annotations_for(std::size_t sentence_index) const;
};

// Ontology file: {"topics":[{"name":..., "event_types":[...]}, ...]}
Ontology load_ontology(const std::filesystem::path& path);

// Corpus file: JSONL, one sentence per line:
//   {"doc_id":..., "sent_id":..., "text":...,
//    "events":[{"type":..., "first_char":..., "phrase":...}, ...]}
// "first_char" counts Unicode scalar values and is authoritative; a
// mid-token offset snaps to the containing token (warning), an offset in
// inter-token whitespace snaps to the next token (warning).
Corpus load_corpus(const std::filesystem::path& path, const Ontology& ontology,
                   std::vector<std::string>* warnings = nullptr);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Ontology copy with each topic restricted to event types having at
// least min_instances annotations; topics left empty are dropped.
Ontology filter_event_types(const Corpus& corpus, const Ontology& ontology,
                            std::size_t min_instances = 10);

// Indices of sentences with at least min_chars scalar values, in corpus
// order.
std::vector<std::size_t> eligible_sentences(const Corpus& corpus,
                                            std::size_t min_chars = 25);

} // namespace lao
