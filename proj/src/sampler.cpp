#include "lao/sampler.hpp"

#include "lao/errors.hpp"
#include "lao/rng.hpp"
#include "lao/text.hpp"

#include <algorithm>
#include <map>

namespace lao {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Reduce a doubled final consonant left by -ing/-ed stripping, keeping
// l/s/z doubles intact ("kill" stays, "stopp" -> "stop").
std::string reduce_double(std::string stem) {
  if (stem.size() >= 2) {
    char a = stem[stem.size() - 2], b = stem.back();
    if (a == b && !is_vowel(b) && b != 'l' && b != 's' && b != 'z')
      stem.pop_back();
  }
  return stem;
}

} // namespace

// Ordered rule table; the first rule whose suffix matches and whose stem
// condition holds wins. A rule that matches the suffix but fails the
// condition falls through.
std::string lemma_key(const std::string& word) {
  std::string w = to_lower_ascii(word);
  auto ends = [&](std::string_view suf) {
    return w.size() >= suf.size() &&
           w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("sses")) return w.substr(0, w.size() - 2);
  if (ends("ing") && w.size() - 3 >= 3)
    return reduce_double(w.substr(0, w.size() - 3));
  if (ends("ed") && w.size() - 2 >= 3)
    return reduce_double(w.substr(0, w.size() - 2));
  if (ends("es") && w.size() - 2 >= 3) return w.substr(0, w.size() - 2);
  if (ends("s") && w.size() - 1 >= 3 && w[w.size() - 2] != 's')
    return w.substr(0, w.size() - 1);
  return w;
}

namespace {

struct LemmaGroup {
  std::string lemma;
  std::size_t instance_count = 0;
  std::vector<std::size_t> sentences; // ascending, distinct
};

} // namespace

FewShotSet select_few_shot(const Corpus& corpus,
                           const std::vector<std::size_t>& pool,
                           const std::string& event_type, std::size_t k,
                           std::uint64_t seed) {
  std::set<std::size_t> pool_set(pool.begin(), pool.end());

  std::map<std::string, std::map<std::size_t, std::size_t>> grouped; // lemma -> sent -> count
  for (const auto& ann : corpus.annotations) {
    if (ann.event_type != event_type) continue;
    if (!pool_set.count(ann.sentence_index)) continue;
    const Sentence& s = corpus.sentences[ann.sentence_index];
    grouped[lemma_key(s.token_text(ann.first_token))][ann.sentence_index]++;
  }

  std::vector<LemmaGroup> groups;
  for (const auto& [lemma, sents] : grouped) {
    LemmaGroup g;
    g.lemma = lemma;
    for (const auto& [sent, n] : sents) {
      g.sentences.push_back(sent);
      g.instance_count += n;
    }
    if (g.instance_count >= 2) groups.push_back(std::move(g));
  }
  // Visiting order doubles as the padding preference: most frequent
  // first, lemma breaks ties.
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.instance_count != b.instance_count)
      return a.instance_count > b.instance_count;
    return a.lemma < b.lemma;
  });
  if (groups.empty())
    throw ValidationError("insufficient exemplars for event type " + event_type);

  Rng rng(mix_seed(seed, "fewshot:" + event_type));
  FewShotSet out;
  out.event_type = event_type;
  std::set<std::size_t> used;

  auto add_example = [&](std::size_t sent, const std::string& lemma) {
    FewShotExample ex;
    ex.sentence_index = sent;
    ex.lemma = lemma;
    for (std::size_t i = 0; i < corpus.annotations.size(); ++i)
      if (corpus.annotations[i].sentence_index == sent &&
          corpus.annotations[i].event_type == event_type)
        ex.annotation_indices.push_back(i);
    out.examples.push_back(std::move(ex));
    used.insert(sent);
  };

  // One uniform draw per group. A sentence attested in several groups is
  // drawn at most once.
  for (const auto& g : groups) {
    if (out.examples.size() >= k) break;
    std::vector<std::size_t> candidates;
    for (std::size_t sent : g.sentences)
      if (!used.count(sent)) candidates.push_back(sent);
    if (candidates.empty()) continue;
    add_example(candidates[rng.below(candidates.size())], g.lemma);
  }

  // Pad from the most frequent groups until k or everything is used.
  for (const auto& g : groups) {
    if (out.examples.size() >= k) break;
    while (out.examples.size() < k) {
      std::vector<std::size_t> candidates;
      for (std::size_t sent : g.sentences)
        if (!used.count(sent)) candidates.push_back(sent);
      if (candidates.empty()) break;
      add_example(candidates[rng.below(candidates.size())], g.lemma);
    }
  }

  if (out.examples.empty())
    throw ValidationError("insufficient exemplars for event type " + event_type);
  return out;
}

TestSequence build_test_sequence(const Corpus& corpus, const Topic& topic,
                                 const std::vector<std::size_t>& pool,
                                 const std::set<std::size_t>& excluded,
                                 std::uint64_t seed, std::size_t max_items) {
  std::set<std::string> topic_types(topic.event_types.begin(),
                                    topic.event_types.end());
  std::set<std::size_t> positive_sents;
  for (const auto& ann : corpus.annotations)
    if (topic_types.count(ann.event_type))
      positive_sents.insert(ann.sentence_index);

  std::vector<std::size_t> positives, negatives;
  for (std::size_t sent : pool) {
    if (excluded.count(sent)) continue;
    (positive_sents.count(sent) ? positives : negatives).push_back(sent);
  }
  if (positives.empty())
    throw ValidationError("empty positive pool for topic " + topic.name);

  Rng rng(mix_seed(seed, "testseq:" + topic.name));
  rng.shuffle(positives);
  rng.shuffle(negatives);

  TestSequence seq;
  seq.topic = topic.name;
  const std::size_t limit = max_items == 0 ? SIZE_MAX : max_items;
  std::size_t pi = 0, ni = 0;
  for (std::size_t n = 0; n < limit; ++n) {
    const bool want_positive = (n % 4 == 0);
    if (want_positive) {
      if (pi >= positives.size()) break;
      seq.items.push_back(positives[pi++]);
    } else {
      if (ni >= negatives.size()) break;
      seq.items.push_back(negatives[ni++]);
    }
    seq.positives_mask.push_back(want_positive);
  }
  return seq;
}

} // namespace lao
