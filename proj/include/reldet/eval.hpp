#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace reldet {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
};

// The six classification measures. Ratios with a zero denominator follow a
// fixed policy (precision/recall/f1 -> 0, kappa with chance agreement 1 ->
// 0, AUC with one class -> 0.5) and the affected metric names are listed in
// `degenerate`.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ck = 0.0;   // Cohen kappa
  double auc = 0.0;  // Mann-Whitney rank statistic, average ranks on ties
  std::vector<std::string> degenerate;

  double by_name(const std::string& measure) const;
};

extern const char* const kMeasureNames[6];

// score >= threshold counts as a positive prediction.
ConfusionCounts confusion(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold);

MetricsReport metrics(const ConfusionCounts& counts,
                      const std::vector<double>& scores,
                      const std::vector<int>& labels);

// One evaluated corpus/topic with a report per model.
struct TopicResult {
  std::string topic;
  std::map<std::string, MetricsReport> per_model;
};

struct AblationRow {
  std::string variant;  // IKOM, NPREV, NBC, NDC, NKC
  MetricsReport report;
};

// Fixed-order rows {IKOM, NPREV, NBC, NDC, NKC}; every variant must be
// present.
std::vector<AblationRow> ablation_table(
    const std::map<std::string, MetricsReport>& per_variant);

// Per topic, models are ranked on the measure (best = highest rank number,
// ties share the average rank); ranks are summed across topics.
std::map<std::string, double> cumulative_ranking(
    const std::vector<TopicResult>& results, const std::string& measure);

struct PairwisePoints {
  std::vector<std::pair<double, double>> points;  // (a_value, b_value)
  std::size_t a_wins = 0;                         // topics where a > b
};

PairwisePoints pairwise_points(const std::vector<TopicResult>& results,
                               const std::string& model_a,
                               const std::string& model_b,
                               const std::string& measure);

}  // namespace reldet

#include "reldet/nn.hpp"

namespace reldet {

// Shared train-then-test driver: splits `trainval` into train/validation
// (stratified, seeded by tcfg.seed), trains the variant, and evaluates the
// returned parameters on `test`.
struct TrainEvalInputs {
  const FeatureSet* trainval = nullptr;
  const FeatureSet* test = nullptr;
  ModelShape shape;
  Variant variant = Variant::INN;
  TrainConfig tcfg;
  double val_fraction = 0.1;
};

struct TrainEvalResult {
  TrainResult trained;
  MetricsReport test_report;
};

TrainEvalResult train_and_evaluate(const TrainEvalInputs& inputs);

// Stratified subset of a feature set; both halves keep input order.
std::pair<FeatureSet, FeatureSet> stratified_select(const FeatureSet& fs,
                                                    double fraction,
                                                    std::uint64_t seed);

struct SweepPoint {
  double fraction = 0.0;
  std::size_t n_train = 0;
  MetricsReport report;
};

// Trains a fresh model per fraction on a stratified subsample of the
// trainval set and evaluates each on the fixed test set. Fraction 1.0
// reproduces a plain train_and_evaluate run with the same seed.
std::vector<SweepPoint> size_sweep(const TrainEvalInputs& inputs,
                                   const std::vector<double>& fractions,
                                   std::uint64_t seed);

}  // namespace reldet
