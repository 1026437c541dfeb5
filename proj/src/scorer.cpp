#include "lao/scorer.hpp"

#include "lao/errors.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace lao {

MatchResult match_predictions(std::span<const Prediction> preds,
                              std::span<const RefPhrase> refs,
                              const std::set<std::string>& known_sent_ids) {
  std::set<std::tuple<std::string, std::string, std::size_t>> ref_keys;
  for (const auto& r : refs)
    ref_keys.insert({r.sent_id, r.event_type, r.first_token});

  MatchResult out;
  out.total_refs = ref_keys.size();
  std::set<std::tuple<std::string, std::string, std::size_t>> seen;
  for (const auto& p : preds) {
    if (!known_sent_ids.count(p.sent_id))
      throw ScoringError("prediction references unknown sent_id " + p.sent_id);
    auto key = std::make_tuple(p.sent_id, p.event_type, p.token_index);
    if (!seen.insert(key).second)
      throw ScoringError("duplicate prediction for sent " + p.sent_id +
                         ", type " + p.event_type + ", token " +
                         std::to_string(p.token_index));
    LabeledPrediction lp;
    lp.sent_id = p.sent_id;
    lp.event_type = p.event_type;
    lp.token_index = p.token_index;
    lp.confidence = p.confidence;
    lp.correct = ref_keys.count(key) > 0;
    out.labeled.push_back(std::move(lp));
  }
  return out;
}

std::vector<SweepRow> sweep_metrics(std::span<const LabeledPrediction> labeled,
                                    std::size_t total_refs) {
  std::vector<SweepRow> rows;
  for (int level = 5; level >= 1; --level) {
    SweepRow row;
    row.level = level;
    for (const auto& p : labeled) {
      if (p.confidence < level) continue;
      (p.correct ? row.tp : row.fp)++;
    }
    row.fn = total_refs - std::min(row.tp, total_refs);
    row.precision =
        (row.tp + row.fp) == 0
            ? 0.0
            : static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp);
    row.recall = total_refs == 0
                     ? 0.0
                     : static_cast<double>(row.tp) / static_cast<double>(total_refs);
    row.f1 = (row.precision + row.recall) == 0.0
                 ? 0.0
                 : 2.0 * row.precision * row.recall /
                       (row.precision + row.recall);
    rows.push_back(row);
  }
  return rows;
}

double roc_auc(std::span<const LabeledPrediction> labeled) {
  // Counts per confidence level; five levels make the pairwise statistic
  // exact with integer arithmetic.
  std::array<long long, 6> t_count{}, f_count{};
  for (const auto& p : labeled) {
    if (p.confidence < 1 || p.confidence > 5)
      throw ScoringError("confidence out of range: " +
                         std::to_string(p.confidence));
    (p.correct ? t_count : f_count)[p.confidence]++;
  }
  long long total_t = 0, total_f = 0;
  for (int c = 1; c <= 5; ++c) {
    total_t += t_count[c];
    total_f += f_count[c];
  }
  if (total_t == 0 || total_f == 0)
    throw ScoringError(
        "degenerate AUC: needs at least one correct and one incorrect "
        "prediction");

  // Each (t, f) pair contributes 2, 1 or 0 in doubled units.
  long long doubled = 0;
  long long f_below = 0;
  for (int c = 1; c <= 5; ++c) {
    doubled += t_count[c] * (2 * f_below + f_count[c]);
    f_below += f_count[c];
  }
  return static_cast<double>(doubled) /
         (2.0 * static_cast<double>(total_t) * static_cast<double>(total_f));
}

std::vector<RocPoint> roc_points(std::span<const SweepRow> rows,
                                 std::span<const LabeledPrediction> labeled,
                                 std::vector<std::string>* notices) {
  std::size_t total_correct = 0, total_incorrect = 0;
  for (const auto& p : labeled) (p.correct ? total_correct : total_incorrect)++;
  if (total_correct == 0 || total_incorrect == 0) {
    if (notices)
      notices->push_back(
          "roc points omitted: no " +
          std::string(total_correct == 0 ? "correct" : "incorrect") +
          " predictions");
    return {};
  }

  std::map<int, std::size_t> exact_counts;
  for (const auto& p : labeled) exact_counts[p.confidence]++;

  std::vector<RocPoint> points;
  for (const auto& row : rows) {
    RocPoint pt;
    pt.level = row.level;
    pt.tp_rate = static_cast<double>(row.tp) / static_cast<double>(total_correct);
    pt.fp_rate =
        static_cast<double>(row.fp) / static_cast<double>(total_incorrect);
    pt.count = exact_counts[row.level];
    points.push_back(pt);
  }
  return points;
}

TopicAggregate aggregate_topic(std::span<const TypeReport> types) {
  TopicAggregate agg;
  for (int level = 5; level >= 1; --level) {
    SweepRow micro;
    micro.level = level;
    double f1_sum = 0.0;
    std::size_t f1_n = 0;
    for (const auto& tr : types) {
      const SweepRow& row = tr.rows[static_cast<std::size_t>(5 - level)];
      micro.tp += row.tp;
      micro.fp += row.fp;
      micro.fn += row.fn;
      if (tr.total_refs == 0 && tr.num_predictions == 0) continue;
      f1_sum += row.f1;
      ++f1_n;
    }
    const std::size_t total_refs = micro.tp + micro.fn;
    micro.precision = (micro.tp + micro.fp) == 0
                          ? 0.0
                          : static_cast<double>(micro.tp) /
                                static_cast<double>(micro.tp + micro.fp);
    micro.recall = total_refs == 0 ? 0.0
                                   : static_cast<double>(micro.tp) /
                                         static_cast<double>(total_refs);
    micro.f1 = (micro.precision + micro.recall) == 0.0
                   ? 0.0
                   : 2.0 * micro.precision * micro.recall /
                         (micro.precision + micro.recall);
    agg.micro.push_back(micro);
    agg.macro_f1[static_cast<std::size_t>(5 - level)] =
        f1_n == 0 ? 0.0 : f1_sum / static_cast<double>(f1_n);
  }

  agg.best_level = 5;
  double best = -1.0;
  for (int level = 5; level >= 1; --level) {
    const double f1 = agg.macro_f1[static_cast<std::size_t>(5 - level)];
    if (f1 > best) { // strict: ties keep the higher level
      best = f1;
      agg.best_level = level;
    }
  }
  return agg;
}

} // namespace lao
