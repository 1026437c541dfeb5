#pragma once

#include "lao/corpus.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace lao {

// Deterministic lowercase lemma approximation via a fixed ordered
// suffix-rule table (see lemma_key in sampler.cpp for the table).
std::string lemma_key(const std::string& word);

struct FewShotExample {
  std::size_t sentence_index = 0;
  std::vector<std::size_t> annotation_indices; // target-type annotations in this sentence
  std::string lemma;                           // group the example was drawn for
};

struct FewShotSet {
  std::string event_type;
  std::vector<FewShotExample> examples; // size <= k, pairwise-distinct sentences
};

// Select up to k exemplar sentences for event_type from the pool
// (eligible sentence indices). Instances are grouped by the lemma of the
// annotated first word; singleton groups are dropped; one uniform draw
// per group in (instance count desc, lemma asc) order; padding comes
// from the most frequent groups first, never repeating a sentence.
// Throws ValidationError("insufficient exemplars") when no group survives.
FewShotSet select_few_shot(const Corpus& corpus,
                           const std::vector<std::size_t>& pool,
                           const std::string& event_type, std::size_t k,
                           std::uint64_t seed);

struct TestSequence {
  std::string topic;
  std::vector<std::size_t> items; // sentence indices
  std::vector<bool> positives_mask;
};

// Repeating [positive, negative, negative, negative] cycle drawn without
// replacement from the pool minus excluded; positive means at least one
// annotation of any of the topic's event types. Stops at max_items
// (0 = unlimited) or when the needed pool empties, truncating mid-cycle.
// Throws ValidationError when the positive pool starts empty.
TestSequence build_test_sequence(const Corpus& corpus, const Topic& topic,
                                 const std::vector<std::size_t>& pool,
                                 const std::set<std::size_t>& excluded,
                                 std::uint64_t seed, std::size_t max_items);

} // namespace lao
