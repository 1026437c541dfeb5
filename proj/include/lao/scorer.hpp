#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace lao {

// One positive system output: a marked token for an event type in a
// sentence, with its elicited confidence.
struct Prediction {
  std::string sent_id;
  std::string event_type;
  std::size_t token_index = 0;
  int confidence = 3; // 1..5
};

struct LabeledPrediction {
  std::string sent_id;
  std::string event_type;
  std::size_t token_index = 0;
  int confidence = 3;
  bool correct = false;
};

// A reference event phrase, keyed by its first token.
struct RefPhrase {
  std::string sent_id;
  std::string event_type;
  std::size_t first_token = 0;
};

struct MatchResult {
  std::vector<LabeledPrediction> labeled;
  std::size_t total_refs = 0; // distinct reference phrases in scope
};

// A prediction is correct iff some reference phrase of the same type in
// the same sentence starts at exactly the predicted token. Predictions
// naming a sentence outside `known_sent_ids` raise ScoringError.
MatchResult match_predictions(std::span<const Prediction> preds,
                              std::span<const RefPhrase> refs,
                              const std::set<std::string>& known_sent_ids);

struct SweepRow {
  int level = 0; // confidence threshold; counts are cumulative over >= level
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Rows for levels 5 down to 1; tp/fp count predictions with confidence
// >= level, fn = total_refs - tp.
std::vector<SweepRow> sweep_metrics(std::span<const LabeledPrediction> labeled,
                                    std::size_t total_refs);

// Mann-Whitney statistic with tie handling: the probability that a
// random correct prediction outranks a random incorrect one, ties
// counting one half. Raises ScoringError when either side is empty.
double roc_auc(std::span<const LabeledPrediction> labeled);

struct RocPoint {
  int level = 0;
  double tp_rate = 0.0;  // cumulative tp at level / total correct
  double fp_rate = 0.0;  // cumulative fp at level / total incorrect
  std::size_t count = 0; // predictions at exactly this level
};

// Degenerate denominators (no correct or no incorrect predictions) omit
// the points and record a notice.
std::vector<RocPoint> roc_points(std::span<const SweepRow> rows,
                                 std::span<const LabeledPrediction> labeled,
                                 std::vector<std::string>* notices = nullptr);

struct TypeReport {
  std::string event_type;
  std::size_t total_refs = 0;
  std::size_t num_predictions = 0;
  std::vector<SweepRow> rows;
};

struct TopicAggregate {
  std::vector<SweepRow> micro;        // tp/fp/fn pooled across types
  std::array<double, 5> macro_f1{};   // index 0 = level 5 ... index 4 = level 1
  int best_level = 5;                 // maximizes macro F1, ties -> higher level
};

// Types with zero references and zero predictions are excluded from the
// macro average.
TopicAggregate aggregate_topic(std::span<const TypeReport> types);

struct TopicScore {
  std::string topic;
  std::vector<TypeReport> per_type;
  TopicAggregate aggregate;
  std::optional<double> auc; // absent when degenerate
  std::string auc_note;      // reason when absent
  std::vector<RocPoint> points;
  std::vector<std::string> notices;
  std::vector<LabeledPrediction> labeled; // all predictions in the topic
};

} // namespace lao
