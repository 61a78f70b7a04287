#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "reldet/centrality.hpp"
#include "reldet/embedding.hpp"
#include "reldet/pipeline.hpp"

namespace reldet {

enum class Variant { INN, IKOM, TEXT_ONLY };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

// A bank of h x width convolution filters with per-filter bias.
struct FilterBank {
  std::size_t h = 0;
  std::size_t width = 0;
  std::size_t count = 0;
  std::vector<double> weights;  // count x (h * width), row-major per filter
  std::vector<double> bias;     // count

  const double* filter(std::size_t i) const {
    return weights.data() + i * h * width;
  }
  double* filter(std::size_t i) { return weights.data() + i * h * width; }
};

// Architecture hyperparameters. Filter heights are fixed (3/4/5 text, 3
// knowledge); counts default to the full-size configuration and shrink only
// for tests.
struct ModelShape {
  std::size_t m = 500;  // text rows
  std::size_t n = 50;   // embedding dimension
  std::size_t keyword_count = 0;
  std::size_t text_filters_h3 = 128;
  std::size_t text_filters_h4 = 256;
  std::size_t text_filters_h5 = 512;
  std::size_t knowledge_filters = 512;
  std::size_t dense_units = 256;
};

struct ModelParams {
  Variant variant = Variant::INN;
  ModelShape shape;
  EmbeddingTable embedding;           // empty for IKOM
  std::vector<FilterBank> text_banks; // h = 3, 4, 5; empty for IKOM
  FilterBank knowledge_bank;          // h = 3, width 4; empty for TEXT_ONLY
  std::vector<double> dense_w;        // dense_units x pooled_count
  std::vector<double> dense_b;        // dense_units
  std::vector<double> out_w;          // dense_units
  double out_b = 0.0;

  // Carried for persistence and pipeline guards.
  Vocab vocab;
  std::uint64_t feature_fingerprint = 0;
  std::uint64_t spec_fingerprint = 0;
  int window = 5;
  EikScaling scaling = EikScaling::Log1p;
  std::size_t min_freq = 2;
  bool stem = false;
  std::uint64_t stopwords_hash = 0;

  bool has_text() const { return variant != Variant::IKOM; }
  bool has_knowledge() const { return variant != Variant::TEXT_ONLY; }
  std::size_t pooled_count() const;
};

ModelParams init_params(Variant variant, const ModelShape& shape,
                        const Vocab& vocab, std::uint64_t seed);

// Dropout probabilities; all zero means no dropout.
struct DropoutRates {
  double input = 0.5;      // embedded text matrix cells
  double text_h3 = 0.5;    // pooled features, text h=3 bank
  double text_h45 = 0.2;   // pooled features, text h=4 and h=5 banks
  double knowledge = 0.2;  // pooled features, knowledge bank
  double dense = 0.5;      // dense-layer activations
};

// Keep masks for one training forward pass (1 = keep).
struct DropoutDraw {
  std::vector<std::uint8_t> input;       // used_rows x n
  std::vector<std::uint8_t> text_h3;
  std::vector<std::uint8_t> text_h4;
  std::vector<std::uint8_t> text_h5;
  std::vector<std::uint8_t> knowledge;
  std::vector<std::uint8_t> dense;
  DropoutRates rates;
};

DropoutDraw draw_dropout(const ModelParams& params, const DropoutRates& rates,
                         std::size_t used_rows, std::mt19937_64& rng);

// Per-bank forward record used to route gradients.
struct BankTrace {
  std::vector<double> pooled;       // post-ReLU max, pre dropout scale
  std::vector<int> argmax;          // winning slice, -1 when dropped
};

struct ForwardTrace {
  bool valid = false;
  std::vector<double> text_input;  // m x n actually convolved (post dropout)
  BankTrace text[3];
  BankTrace knowledge;
  std::vector<double> concat;      // dense input (post dropout scaling)
  std::vector<double> z1;          // dense pre-activations
  std::vector<double> dense_out;   // post ReLU and dropout scaling
  double z2 = 0.0;
  double prob = 0.0;
};

// One convolution bank over M: per filter, stride-1 slices down the rows,
// Frobenius inner product plus bias, ReLU, then max over the rows-h+1
// values. No dropout.
std::vector<double> conv_branch(const std::vector<double>& M,
                                std::size_t rows, std::size_t cols,
                                const FilterBank& bank);

// Deterministic inference forward; no dropout, no stochasticity.
double forward(const ModelParams& params, const EmbeddedText* text,
               const EikMatrix* eik);

// Training forward with the given masks (inverted dropout). The trace is
// required by backward and must come from the same call.
double forward_train(const ModelParams& params, const EmbeddedText* text,
                     const EikMatrix* eik, const DropoutDraw& masks,
                     ForwardTrace& trace);

// Binary cross-entropy with probability clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

struct Gradients {
  std::vector<double> embedding;
  std::vector<double> text_weights[3];
  std::vector<double> text_bias[3];
  std::vector<double> knowledge_weights;
  std::vector<double> knowledge_bias;
  std::vector<double> dense_w, dense_b, out_w;
  double out_b = 0.0;

  static Gradients zeros_like(const ModelParams& params);
  void scale(double s);
};

// Exact partials of bce_loss(forward_train(...), y) w.r.t. every trainable
// parameter, accumulated into `grads`. Max pooling routes gradient to the
// argmax slice only; the padding embedding row never receives gradient.
void backward(const ModelParams& params, const ForwardTrace& trace,
              const EmbeddedText* text, const EikMatrix* eik, int y,
              const DropoutDraw& masks, Gradients& grads);

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::uint64_t t = 0;
};

// Standard Adam update, beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               double lr);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  DropoutRates dropout;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  double threshold = 0.5;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when no validation set
  double val_f1 = 0.0;    // NaN when no validation set
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Mini-batch training with seeded shuffling; early stop on validation loss
// with the configured patience, returning the best-validation parameters.
TrainResult train(const TrainConfig& cfg, const ModelShape& shape,
                  Variant variant, const FeatureSet& train_set,
                  const FeatureSet& val_set);

struct Prediction {
  std::string id;
  double score = 0.0;
  int label = 0;
};

// Deterministic scores in corpus order; labels at the threshold. The
// feature fingerprint must match the model's.
std::vector<Prediction> predict(const ModelParams& params,
                                const FeatureSet& features, double threshold);

void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

void write_history(std::ostream& out, const TrainHistory& h);

}  // namespace reldet
