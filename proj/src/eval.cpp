#include "reldet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "reldet/errors.hpp"

namespace reldet {

const char* const kMeasureNames[6] = {"accuracy", "precision", "recall",
                                      "f1",       "ck",        "auc"};

double MetricsReport::by_name(const std::string& measure) const {
  if (measure == "accuracy") return accuracy;
  if (measure == "precision") return precision;
  if (measure == "recall") return recall;
  if (measure == "f1") return f1;
  if (measure == "ck") return ck;
  if (measure == "auc") return auc;
  throw ConfigError("unknown measure \"" + measure + "\"");
}

ConfusionCounts confusion(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold) {
  if (scores.size() != labels.size())
    throw DataError("confusion: scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw DataError("confusion: labels must be 0 or 1");
    const bool pred = scores[i] >= threshold;
    if (pred)
      (labels[i] == 1 ? c.tp : c.fp) += 1;
    else
      (labels[i] == 1 ? c.fn : c.tn) += 1;
  }
  return c;
}

namespace {

// AUC as the Mann-Whitney rank statistic with average ranks on tied scores.
double rank_auc(const std::vector<double>& scores,
                const std::vector<int>& labels, bool& degenerate) {
  std::int64_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    degenerate = true;
    return 0.5;
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace

MetricsReport metrics(const ConfusionCounts& c,
                      const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("metrics: scores and labels differ in length");
  if (c.total() != static_cast<std::int64_t>(labels.size()))
    throw DataError("metrics: counts do not cover the predictions");
  if (c.total() == 0) throw DataError("metrics: nothing to evaluate");
  MetricsReport r;
  const double total = static_cast<double>(c.total());
  r.accuracy = static_cast<double>(c.tp + c.tn) / total;
  if (c.tp + c.fp > 0) {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    r.precision = 0.0;
    r.degenerate.push_back("precision");
  }
  if (c.tp + c.fn > 0) {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    r.recall = 0.0;
    r.degenerate.push_back("recall");
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f1 = 0.0;
    r.degenerate.push_back("f1");
  }
  // Cohen kappa from the two-rater marginals.
  const double oa = static_cast<double>(c.tp + c.tn) / total;
  const double chance_num =
      static_cast<double>((c.tp + c.fp) * (c.tp + c.fn) +
                          (c.fn + c.tn) * (c.fp + c.tn));
  const double ac = chance_num / (total * total);
  if (ac < 1.0) {
    r.ck = (oa - ac) / (1.0 - ac);
  } else {
    r.ck = 0.0;
    r.degenerate.push_back("ck");
  }
  bool auc_degenerate = false;
  r.auc = rank_auc(scores, labels, auc_degenerate);
  if (auc_degenerate) r.degenerate.push_back("auc");
  return r;
}

std::vector<AblationRow> ablation_table(
    const std::map<std::string, MetricsReport>& per_variant) {
  static const char* const kOrder[5] = {"IKOM", "NPREV", "NBC", "NDC", "NKC"};
  std::vector<AblationRow> rows;
  for (const char* name : kOrder) {
    auto it = per_variant.find(name);
    if (it == per_variant.end())
      throw DataError("ablation_table: missing variant " + std::string(name));
    rows.push_back({name, it->second});
  }
  return rows;
}

namespace {

// Ranks values ascending: best value gets the highest rank number, ties
// share the average of the ranks they span.
std::map<std::string, double> rank_models(
    const std::vector<std::pair<std::string, double>>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a].second < values[b].second;
  });
  std::map<std::string, double> ranks;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() &&
           values[idx[j]].second == values[idx[i]].second)
      ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) /
                       2.0;
    for (std::size_t k = i; k < j; ++k) ranks[values[idx[k]].first] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

std::map<std::string, double> cumulative_ranking(
    const std::vector<TopicResult>& results, const std::string& measure) {
  if (results.empty()) throw DataError("cumulative_ranking: no topics");
  std::map<std::string, double> sums;
  for (const auto& topic : results) {
    std::vector<std::pair<std::string, double>> values;
    for (const auto& [model, report] : topic.per_model)
      values.emplace_back(model, report.by_name(measure));
    for (const auto& [model, rank] : rank_models(values)) sums[model] += rank;
  }
  return sums;
}

PairwisePoints pairwise_points(const std::vector<TopicResult>& results,
                               const std::string& model_a,
                               const std::string& model_b,
                               const std::string& measure) {
  PairwisePoints out;
  for (const auto& topic : results) {
    auto ia = topic.per_model.find(model_a);
    auto ib = topic.per_model.find(model_b);
    if (ia == topic.per_model.end() || ib == topic.per_model.end())
      throw DataError("pairwise_points: topic \"" + topic.topic +
                      "\" lacks model " +
                      (ia == topic.per_model.end() ? model_a : model_b));
    const double a = ia->second.by_name(measure);
    const double b = ib->second.by_name(measure);
    out.points.emplace_back(a, b);
    if (a > b) ++out.a_wins;
  }
  return out;
}

std::pair<FeatureSet, FeatureSet> stratified_select(const FeatureSet& fs,
                                                    double fraction,
                                                    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("stratified_select: fraction must be in (0, 1]");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < fs.docs.size(); ++i) {
    if (!fs.docs[i].label)
      throw DataError("stratified_select: document \"" + fs.docs[i].id +
                      "\" is unlabeled");
    (*fs.docs[i].label == 1 ? pos : neg).push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> selected(fs.docs.size(), false);
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    auto take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(cls->size())));
    take = std::min(take, cls->size());
    for (std::size_t k = 0; k < take; ++k) selected[(*cls)[k]] = true;
  }
  FeatureSet in, out;
  in.fingerprint = out.fingerprint = fs.fingerprint;
  in.spec_fingerprint = out.spec_fingerprint = fs.spec_fingerprint;
  in.opts = out.opts = fs.opts;
  in.vocab = out.vocab = fs.vocab;
  in.keywords = out.keywords = fs.keywords;
  for (std::size_t i = 0; i < fs.docs.size(); ++i)
    (selected[i] ? in : out).docs.push_back(fs.docs[i]);
  return {std::move(in), std::move(out)};
}

TrainEvalResult train_and_evaluate(const TrainEvalInputs& inputs) {
  if (!inputs.trainval || !inputs.test)
    throw ConfigError("train_and_evaluate: missing feature sets");
  if (!(inputs.val_fraction >= 0.0 && inputs.val_fraction < 1.0))
    throw ConfigError("train_and_evaluate: val_fraction must be in [0, 1)");
  FeatureSet train_part, val_part;
  if (inputs.val_fraction > 0.0) {
    auto [tr, va] = stratified_select(*inputs.trainval,
                                      1.0 - inputs.val_fraction,
                                      inputs.tcfg.seed);
    train_part = std::move(tr);
    val_part = std::move(va);
  } else {
    train_part = *inputs.trainval;
  }
  if (train_part.docs.empty()) {
    // too few documents to spare a validation set
    train_part = *inputs.trainval;
    val_part.docs.clear();
  }
  TrainEvalResult res;
  res.trained = train(inputs.tcfg, inputs.shape, inputs.variant, train_part,
                      val_part);
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& pred :
       predict(res.trained.params, *inputs.test, inputs.tcfg.threshold)) {
    scores.push_back(pred.score);
  }
  for (const auto& d : inputs.test->docs) {
    if (!d.label)
      throw DataError("train_and_evaluate: test document \"" + d.id +
                      "\" is unlabeled");
    labels.push_back(*d.label);
  }
  res.test_report =
      metrics(confusion(scores, labels, inputs.tcfg.threshold), scores,
              labels);
  return res;
}

std::vector<SweepPoint> size_sweep(const TrainEvalInputs& inputs,
                                   const std::vector<double>& fractions,
                                   std::uint64_t seed) {
  if (fractions.empty()) throw ConfigError("size_sweep: no fractions given");
  std::vector<SweepPoint> out;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double fraction = fractions[fi];
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw ConfigError("size_sweep: fractions must lie in (0, 1]");
    auto [sample, rest] =
        stratified_select(*inputs.trainval, fraction, seed + fi);
    std::int64_t pos = 0, neg = 0;
    for (const auto& d : sample.docs) (*d.label == 1 ? pos : neg) += 1;
    if (pos < 1 || neg < 1)
      throw DataError("size_sweep: fraction " + std::to_string(fraction) +
                      " leaves a class with no training documents");
    TrainEvalInputs sub = inputs;
    sub.trainval = &sample;
    TrainEvalResult r = train_and_evaluate(sub);
    out.push_back({fraction, sample.docs.size(), r.test_report});
  }
  return out;
}

}  // namespace reldet
