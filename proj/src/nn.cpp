#include "reldet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "reldet/errors.hpp"
#include "reldet/eval.hpp"
#include "reldet/util.hpp"

namespace reldet {

Variant parse_variant(const std::string& name) {
  std::string v = to_lower_ascii(name);
  if (v == "inn") return Variant::INN;
  if (v == "ikom") return Variant::IKOM;
  if (v == "text_only" || v == "text-only" || v == "textonly")
    return Variant::TEXT_ONLY;
  throw ConfigError("unknown variant \"" + name + "\"");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::INN:
      return "INN";
    case Variant::IKOM:
      return "IKOM";
    case Variant::TEXT_ONLY:
      return "TEXT_ONLY";
  }
  return "?";
}

std::size_t ModelParams::pooled_count() const {
  std::size_t total = 0;
  if (has_text())
    total += shape.text_filters_h3 + shape.text_filters_h4 +
             shape.text_filters_h5;
  if (has_knowledge()) total += shape.knowledge_filters;
  return total;
}

namespace {

constexpr double kClampEps = 1e-7;

FilterBank make_bank(std::size_t h, std::size_t width, std::size_t count) {
  FilterBank b;
  b.h = h;
  b.width = width;
  b.count = count;
  b.weights.assign(count * h * width, 0.0);
  b.bias.assign(count, 0.0);
  return b;
}

void fill_uniform(std::vector<double>& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (double& x : v) x = dist(rng);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

ModelParams init_params(Variant variant, const ModelShape& shape,
                        const Vocab& vocab, std::uint64_t seed) {
  ModelParams p;
  p.variant = variant;
  p.shape = shape;
  p.vocab = vocab;
  if (shape.dense_units < 1) throw ConfigError("dense_units must be >= 1");
  if (p.has_text()) {
    if (shape.n < 1) throw ConfigError("embedding dimension must be >= 1");
    if (shape.m < 5)
      throw ConfigError("sequence capacity m must be >= 5 (largest filter)");
    p.embedding = init_embeddings(vocab, shape.n, seed ^ 0x9e3779b97f4a7c15ull);
  }
  if (p.has_knowledge() && shape.keyword_count < 3)
    throw ConfigError("knowledge branch needs >= 3 keywords (filter height 3)");
  std::mt19937_64 rng(seed);
  if (p.has_text()) {
    p.text_banks.push_back(make_bank(3, shape.n, shape.text_filters_h3));
    p.text_banks.push_back(make_bank(4, shape.n, shape.text_filters_h4));
    p.text_banks.push_back(make_bank(5, shape.n, shape.text_filters_h5));
    for (auto& b : p.text_banks) fill_uniform(b.weights, rng);
  }
  if (p.has_knowledge()) {
    p.knowledge_bank = make_bank(3, 4, shape.knowledge_filters);
    fill_uniform(p.knowledge_bank.weights, rng);
  }
  const std::size_t pooled = p.pooled_count();
  p.dense_w.assign(shape.dense_units * pooled, 0.0);
  p.dense_b.assign(shape.dense_units, 0.0);
  p.out_w.assign(shape.dense_units, 0.0);
  fill_uniform(p.dense_w, rng);
  fill_uniform(p.out_w, rng);
  return p;
}

DropoutDraw draw_dropout(const ModelParams& params, const DropoutRates& rates,
                         std::size_t used_rows, std::mt19937_64& rng) {
  for (double r : {rates.input, rates.text_h3, rates.text_h45,
                   rates.knowledge, rates.dense})
    if (r < 0.0 || r >= 1.0)
      throw ConfigError("dropout rates must lie in [0, 1)");
  DropoutDraw d;
  d.rates = rates;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto bern = [&](std::size_t count, double p, std::vector<std::uint8_t>& out) {
    if (p <= 0.0) return;  // empty mask = keep everything
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = u(rng) >= p ? 1 : 0;
  };
  if (params.has_text()) {
    bern(used_rows * params.shape.n, rates.input, d.input);
    bern(params.shape.text_filters_h3, rates.text_h3, d.text_h3);
    bern(params.shape.text_filters_h4, rates.text_h45, d.text_h4);
    bern(params.shape.text_filters_h5, rates.text_h45, d.text_h5);
  }
  if (params.has_knowledge())
    bern(params.shape.knowledge_filters, rates.knowledge, d.knowledge);
  bern(params.shape.dense_units, rates.dense, d.dense);
  return d;
}

namespace {

// Convolves one bank; when `keep` is non-null, dropped filters are skipped
// and surviving pooled features are scaled by inv_keep (inverted dropout).
void conv_bank_core(const double* M, std::size_t rows, std::size_t cols,
                    const FilterBank& bank, const std::uint8_t* keep,
                    double inv_keep, BankTrace* trace, double* out) {
  if (bank.width != cols)
    throw ConfigError("convolution: filter width " +
                      std::to_string(bank.width) + " != matrix columns " +
                      std::to_string(cols));
  if (rows < bank.h)
    throw ConfigError("convolution: matrix has " + std::to_string(rows) +
                      " rows, filter height is " + std::to_string(bank.h));
  const std::size_t slices = rows - bank.h + 1;
  const std::size_t flat = bank.h * cols;
  if (trace) {
    trace->pooled.assign(bank.count, 0.0);
    trace->argmax.assign(bank.count, -1);
  }
  for (std::size_t i = 0; i < bank.count; ++i) {
    if (keep && !keep[i]) {
      out[i] = 0.0;
      continue;
    }
    const double* w = bank.filter(i);
    const double b = bank.bias[i];
    double best = 0.0;  // ReLU floor
    int best_k = -1;
    for (std::size_t k = 0; k < slices; ++k) {
      double z = b + dot(w, M + k * cols, flat);
      if (z > best) {
        best = z;
        best_k = static_cast<int>(k);
      }
    }
    if (trace) {
      trace->pooled[i] = best;
      trace->argmax[i] = best_k;
    }
    out[i] = keep ? best * inv_keep : best;
  }
}

void check_inputs(const ModelParams& p, const EmbeddedText* text,
                  const EikMatrix* eik) {
  if (p.has_text()) {
    if (!text)
      throw ConfigError(variant_name(p.variant) +
                        " forward needs an embedded text matrix");
    if (text->m != p.shape.m || text->n != p.shape.n)
      throw ConfigError("embedded text shape " + std::to_string(text->m) +
                        "x" + std::to_string(text->n) + " does not match " +
                        std::to_string(p.shape.m) + "x" +
                        std::to_string(p.shape.n));
  } else if (text) {
    throw ConfigError("variant IKOM takes no text input");
  }
  if (p.has_knowledge()) {
    if (!eik)
      throw ConfigError(variant_name(p.variant) +
                        " forward needs an EIK matrix");
    if (eik->keyword_count() != p.shape.keyword_count)
      throw ConfigError("EIK has " + std::to_string(eik->keyword_count()) +
                        " rows, model expects " +
                        std::to_string(p.shape.keyword_count));
  } else if (eik) {
    throw ConfigError("variant TEXT_ONLY takes no EIK input");
  }
}

double forward_core(const ModelParams& p, const EmbeddedText* text,
                    const EikMatrix* eik, const DropoutDraw* masks,
                    ForwardTrace* trace) {
  check_inputs(p, text, eik);
  const std::size_t pooled_total = p.pooled_count();
  std::vector<double> concat(pooled_total, 0.0);
  std::size_t offset = 0;

  if (p.has_text()) {
    const double* M = text->data.data();
    std::vector<double> dropped;
    if (masks && !masks->input.empty()) {
      dropped = text->data;
      const double inv = 1.0 / (1.0 - masks->rates.input);
      const std::size_t used = text->ids.size() * text->n;
      for (std::size_t i = 0; i < used; ++i)
        dropped[i] = masks->input[i] ? dropped[i] * inv : 0.0;
      M = dropped.data();
    }
    if (trace) trace->text_input.assign(M, M + text->m * text->n);
    const std::vector<std::uint8_t>* bank_masks[3] = {nullptr, nullptr,
                                                      nullptr};
    double bank_rates[3] = {0.0, 0.0, 0.0};
    if (masks) {
      bank_masks[0] = &masks->text_h3;
      bank_masks[1] = &masks->text_h4;
      bank_masks[2] = &masks->text_h5;
      bank_rates[0] = masks->rates.text_h3;
      bank_rates[1] = masks->rates.text_h45;
      bank_rates[2] = masks->rates.text_h45;
    }
    for (std::size_t b = 0; b < p.text_banks.size(); ++b) {
      const auto& bank = p.text_banks[b];
      const std::uint8_t* keep =
          bank_masks[b] && !bank_masks[b]->empty() ? bank_masks[b]->data()
                                                   : nullptr;
      conv_bank_core(M, text->m, text->n, bank, keep,
                     keep ? 1.0 / (1.0 - bank_rates[b]) : 1.0,
                     trace ? &trace->text[b] : nullptr,
                     concat.data() + offset);
      offset += bank.count;
    }
  }
  if (p.has_knowledge()) {
    std::vector<double> K = eik->dense();
    const std::uint8_t* keep =
        masks && !masks->knowledge.empty() ? masks->knowledge.data() : nullptr;
    conv_bank_core(K.data(), eik->keyword_count(), 4, p.knowledge_bank, keep,
                   keep ? 1.0 / (1.0 - masks->rates.knowledge) : 1.0,
                   trace ? &trace->knowledge : nullptr,
                   concat.data() + offset);
    offset += p.knowledge_bank.count;
  }

  const std::size_t units = p.shape.dense_units;
  std::vector<double> z1(units), dense_out(units);
  const bool dense_drop = masks && !masks->dense.empty();
  const double inv_dense =
      dense_drop ? 1.0 / (1.0 - masks->rates.dense) : 1.0;
  for (std::size_t j = 0; j < units; ++j) {
    double z = p.dense_b[j] +
               dot(p.dense_w.data() + j * pooled_total, concat.data(),
                   pooled_total);
    z1[j] = z;
    double a = z > 0.0 ? z : 0.0;
    if (dense_drop) a = masks->dense[j] ? a * inv_dense : 0.0;
    dense_out[j] = a;
  }
  double z2 = p.out_b + dot(p.out_w.data(), dense_out.data(), units);
  double prob = sigmoid(z2);
  if (trace) {
    trace->valid = true;
    trace->concat = std::move(concat);
    trace->z1 = std::move(z1);
    trace->dense_out = std::move(dense_out);
    trace->z2 = z2;
    trace->prob = prob;
  }
  return prob;
}

}  // namespace

std::vector<double> conv_branch(const std::vector<double>& M,
                                std::size_t rows, std::size_t cols,
                                const FilterBank& bank) {
  if (M.size() != rows * cols)
    throw ConfigError("conv_branch: matrix buffer size mismatch");
  std::vector<double> out(bank.count, 0.0);
  conv_bank_core(M.data(), rows, cols, bank, nullptr, 1.0, nullptr,
                 out.data());
  return out;
}

double forward(const ModelParams& params, const EmbeddedText* text,
               const EikMatrix* eik) {
  return forward_core(params, text, eik, nullptr, nullptr);
}

double forward_train(const ModelParams& params, const EmbeddedText* text,
                     const EikMatrix* eik, const DropoutDraw& masks,
                     ForwardTrace& trace) {
  return forward_core(params, text, eik, &masks, &trace);
}

double bce_loss(double p, int y) {
  if (y != 0 && y != 1) throw ConfigError("bce_loss: label must be 0 or 1");
  double q = std::min(1.0 - kClampEps, std::max(kClampEps, p));
  return -(y * std::log(q) + (1 - y) * std::log(1.0 - q));
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  g.embedding.assign(p.embedding.data.size(), 0.0);
  for (std::size_t b = 0; b < p.text_banks.size(); ++b) {
    g.text_weights[b].assign(p.text_banks[b].weights.size(), 0.0);
    g.text_bias[b].assign(p.text_banks[b].bias.size(), 0.0);
  }
  g.knowledge_weights.assign(p.knowledge_bank.weights.size(), 0.0);
  g.knowledge_bias.assign(p.knowledge_bank.bias.size(), 0.0);
  g.dense_w.assign(p.dense_w.size(), 0.0);
  g.dense_b.assign(p.dense_b.size(), 0.0);
  g.out_w.assign(p.out_w.size(), 0.0);
  g.out_b = 0.0;
  return g;
}

void Gradients::scale(double s) {
  auto mul = [s](std::vector<double>& v) {
    for (double& x : v) x *= s;
  };
  mul(embedding);
  for (auto& w : text_weights) mul(w);
  for (auto& b : text_bias) mul(b);
  mul(knowledge_weights);
  mul(knowledge_bias);
  mul(dense_w);
  mul(dense_b);
  mul(out_w);
  out_b *= s;
}

void backward(const ModelParams& p, const ForwardTrace& trace,
              const EmbeddedText* text, const EikMatrix* eik, int y,
              const DropoutDraw& masks, Gradients& grads) {
  if (!trace.valid)
    throw ConfigError("backward called without a paired forward trace");
  check_inputs(p, text, eik);
  const std::size_t pooled_total = p.pooled_count();
  const std::size_t units = p.shape.dense_units;

  const double dz2 = trace.prob - static_cast<double>(y);
  grads.out_b += dz2;
  std::vector<double> dconcat(pooled_total, 0.0);
  const bool dense_drop = !masks.dense.empty();
  const double inv_dense = dense_drop ? 1.0 / (1.0 - masks.rates.dense) : 1.0;
  for (std::size_t j = 0; j < units; ++j) {
    grads.out_w[j] += dz2 * trace.dense_out[j];
    double da = dz2 * p.out_w[j];
    if (dense_drop) da = masks.dense[j] ? da * inv_dense : 0.0;
    if (trace.z1[j] <= 0.0) continue;
    grads.dense_b[j] += da;
    const double* wrow = p.dense_w.data() + j * pooled_total;
    double* grow = grads.dense_w.data() + j * pooled_total;
    for (std::size_t q = 0; q < pooled_total; ++q) {
      grow[q] += da * trace.concat[q];
      dconcat[q] += da * wrow[q];
    }
  }

  std::size_t offset = 0;
  if (p.has_text()) {
    const std::size_t n = p.shape.n;
    std::vector<double> dM(p.shape.m * n, 0.0);
    const std::vector<std::uint8_t>* bank_masks[3] = {
        &masks.text_h3, &masks.text_h4, &masks.text_h5};
    const double bank_rates[3] = {masks.rates.text_h3, masks.rates.text_h45,
                                  masks.rates.text_h45};
    for (std::size_t b = 0; b < p.text_banks.size(); ++b) {
      const auto& bank = p.text_banks[b];
      const bool drop = !bank_masks[b]->empty();
      const double inv = drop ? 1.0 / (1.0 - bank_rates[b]) : 1.0;
      const std::size_t flat = bank.h * n;
      for (std::size_t i = 0; i < bank.count; ++i) {
        if (drop && !(*bank_masks[b])[i]) continue;
        int k = trace.text[b].argmax[i];
        if (k < 0) continue;  // all slices pooled to zero
        double g = dconcat[offset + i];
        if (drop) g *= inv;
        grads.text_bias[b][i] += g;
        const double* slice =
            trace.text_input.data() + static_cast<std::size_t>(k) * n;
        const double* w = bank.filter(i);
        double* gw = grads.text_weights[b].data() + i * flat;
        double* gm = dM.data() + static_cast<std::size_t>(k) * n;
        for (std::size_t t = 0; t < flat; ++t) {
          gw[t] += g * slice[t];
          gm[t] += g * w[t];
        }
      }
      offset += bank.count;
    }
    // chain through the input dropout back to the embedding rows
    const bool in_drop = !masks.input.empty();
    const double inv_in = in_drop ? 1.0 / (1.0 - masks.rates.input) : 1.0;
    for (std::size_t r = 0; r < text->ids.size(); ++r) {
      auto row = static_cast<std::size_t>(text->ids[r]);
      if (row == static_cast<std::size_t>(Vocab::kPad)) continue;
      double* gtab = grads.embedding.data() + row * n;
      for (std::size_t c = 0; c < n; ++c) {
        double v = dM[r * n + c];
        if (in_drop) v = masks.input[r * n + c] ? v * inv_in : 0.0;
        gtab[c] += v;
      }
    }
  }
  if (p.has_knowledge()) {
    const auto& bank = p.knowledge_bank;
    std::vector<double> K = eik->dense();
    const bool drop = !masks.knowledge.empty();
    const double inv = drop ? 1.0 / (1.0 - masks.rates.knowledge) : 1.0;
    const std::size_t flat = bank.h * 4;
    for (std::size_t i = 0; i < bank.count; ++i) {
      if (drop && !masks.knowledge[i]) continue;
      int k = trace.knowledge.argmax[i];
      if (k < 0) continue;
      double g = dconcat[offset + i];
      if (drop) g *= inv;
      grads.knowledge_bias[i] += g;
      const double* slice = K.data() + static_cast<std::size_t>(k) * 4;
      double* gw = grads.knowledge_weights.data() + i * flat;
      for (std::size_t t = 0; t < flat; ++t) gw[t] += g * slice[t];
    }
  }
}

namespace {

struct Span {
  double* p;
  std::size_t len;
};
struct ConstSpan {
  const double* p;
  std::size_t len;
};

std::vector<Span> param_tensors(ModelParams& p) {
  std::vector<Span> out;
  if (p.has_text()) {
    out.push_back({p.embedding.data.data(), p.embedding.data.size()});
    for (auto& b : p.text_banks) {
      out.push_back({b.weights.data(), b.weights.size()});
      out.push_back({b.bias.data(), b.bias.size()});
    }
  }
  if (p.has_knowledge()) {
    out.push_back(
        {p.knowledge_bank.weights.data(), p.knowledge_bank.weights.size()});
    out.push_back({p.knowledge_bank.bias.data(), p.knowledge_bank.bias.size()});
  }
  out.push_back({p.dense_w.data(), p.dense_w.size()});
  out.push_back({p.dense_b.data(), p.dense_b.size()});
  out.push_back({p.out_w.data(), p.out_w.size()});
  out.push_back({&p.out_b, 1});
  return out;
}

std::vector<ConstSpan> grad_tensors(const ModelParams& p,
                                    const Gradients& g) {
  std::vector<ConstSpan> out;
  if (p.has_text()) {
    out.push_back({g.embedding.data(), g.embedding.size()});
    for (std::size_t b = 0; b < p.text_banks.size(); ++b) {
      out.push_back({g.text_weights[b].data(), g.text_weights[b].size()});
      out.push_back({g.text_bias[b].data(), g.text_bias[b].size()});
    }
  }
  if (p.has_knowledge()) {
    out.push_back({g.knowledge_weights.data(), g.knowledge_weights.size()});
    out.push_back({g.knowledge_bias.data(), g.knowledge_bias.size()});
  }
  out.push_back({g.dense_w.data(), g.dense_w.size()});
  out.push_back({g.dense_b.data(), g.dense_b.size()});
  out.push_back({g.out_w.data(), g.out_w.size()});
  out.push_back({&g.out_b, 1});
  return out;
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  auto ps = param_tensors(params);
  auto gs = grad_tensors(params, grads);
  if (ps.size() != gs.size())
    throw ConfigError("adam_step: tensor count mismatch");
  if (state.m.empty()) {
    state.m.resize(ps.size());
    state.v.resize(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      state.m[i].assign(ps[i].len, 0.0);
      state.v[i].assign(ps[i].len, 0.0);
    }
    state.t = 0;
  }
  if (state.m.size() != ps.size())
    throw ConfigError("adam_step: state shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].len != gs[i].len || state.m[i].size() != ps[i].len)
      throw ConfigError("adam_step: tensor shape mismatch");
    double* w = ps[i].p;
    const double* g = gs[i].p;
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    for (std::size_t j = 0; j < ps[i].len; ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

void check_labeled(const FeatureSet& fs, const char* what) {
  for (const auto& d : fs.docs)
    if (!d.label)
      throw DataError(std::string(what) + " document \"" + d.id +
                      "\" is unlabeled");
}

struct EvalPass {
  double loss = 0.0;
  double f1 = 0.0;
};

EvalPass evaluate_pass(const ModelParams& params, const FeatureSet& fs,
                       double threshold) {
  EvalPass out;
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(fs.docs.size());
  for (const auto& doc : fs.docs) {
    EmbeddedText et;
    const EmbeddedText* tp = nullptr;
    if (params.has_text()) {
      et = embed_ids(doc.token_ids, params.embedding, params.shape.m);
      tp = &et;
    }
    const EikMatrix* ep = params.has_knowledge() ? &doc.eik : nullptr;
    double prob = forward(params, tp, ep);
    out.loss += bce_loss(prob, *doc.label);
    scores.push_back(prob);
    labels.push_back(*doc.label);
  }
  out.loss /= static_cast<double>(fs.docs.size());
  MetricsReport rep =
      metrics(confusion(scores, labels, threshold), scores, labels);
  out.f1 = rep.f1;
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const ModelShape& shape,
                  Variant variant, const FeatureSet& train_set,
                  const FeatureSet& val_set) {
  if (train_set.docs.empty()) throw DataError("train: empty training set");
  if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0))
    throw ConfigError("train: learning rate must be > 0");
  check_labeled(train_set, "training");
  check_labeled(val_set, "validation");
  if (!val_set.docs.empty() &&
      val_set.fingerprint != train_set.fingerprint)
    throw ConfigError("train: validation features come from a different "
                      "pipeline than the training features");

  ModelShape sh = shape;
  sh.m = train_set.opts.m;
  sh.keyword_count = train_set.keywords.size();
  ModelParams params = init_params(variant, sh, train_set.vocab, cfg.seed);
  params.feature_fingerprint = train_set.fingerprint;
  params.spec_fingerprint = train_set.spec_fingerprint;
  params.window = train_set.opts.window;
  params.scaling = train_set.opts.scaling;
  params.min_freq = train_set.opts.min_freq;
  params.stem = train_set.opts.stem;
  params.stopwords_hash = train_set.opts.stopwords_hash();

  std::mt19937_64 rng(cfg.seed);
  Gradients grads = Gradients::zeros_like(params);
  AdamState adam;
  TrainHistory history;
  ModelParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t epochs_without_improvement = 0;
  const bool has_val = !val_set.docs.empty();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> order(train_set.docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, order.size());
      Gradients fresh = Gradients::zeros_like(params);
      grads = std::move(fresh);
      for (std::size_t k = start; k < stop; ++k) {
        const DocFeatures& doc = train_set.docs[order[k]];
        EmbeddedText et;
        const EmbeddedText* tp = nullptr;
        if (params.has_text()) {
          et = embed_ids(doc.token_ids, params.embedding, params.shape.m);
          tp = &et;
        }
        const EikMatrix* ep = params.has_knowledge() ? &doc.eik : nullptr;
        DropoutDraw masks =
            draw_dropout(params, cfg.dropout, et.ids.size(), rng);
        ForwardTrace trace;
        double prob = forward_train(params, tp, ep, masks, trace);
        loss_sum += bce_loss(prob, *doc.label);
        backward(params, trace, tp, ep, *doc.label, masks, grads);
      }
      grads.scale(1.0 / static_cast<double>(stop - start));
      adam_step(params, grads, adam, cfg.learning_rate);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    if (has_val) {
      EvalPass vp = evaluate_pass(params, val_set, cfg.threshold);
      stats.val_loss = vp.loss;
      stats.val_f1 = vp.f1;
      history.epochs.push_back(stats);
      if (vp.loss < best_val) {
        best_val = vp.loss;
        best = params;
        best_epoch = epoch;
        epochs_without_improvement = 0;
      } else {
        ++epochs_without_improvement;
        if (epochs_without_improvement > cfg.patience) break;
      }
    } else {
      stats.val_loss = nan;
      stats.val_f1 = nan;
      history.epochs.push_back(stats);
    }
  }
  if (!has_val) {
    best = params;
    best_epoch = history.epochs.size();
  }
  history.best_epoch = best_epoch;
  return {std::move(best), std::move(history)};
}

std::vector<Prediction> predict(const ModelParams& params,
                                const FeatureSet& features, double threshold) {
  if (params.feature_fingerprint == 0)
    throw ModelError("predict: model carries no feature fingerprint");
  if (features.fingerprint != params.feature_fingerprint)
    throw ModelError(
        "predict: features were built with a different pipeline than the "
        "model (fingerprint mismatch)");
  std::vector<Prediction> out;
  out.reserve(features.docs.size());
  for (const auto& doc : features.docs) {
    EmbeddedText et;
    const EmbeddedText* tp = nullptr;
    if (params.has_text()) {
      et = embed_ids(doc.token_ids, params.embedding, params.shape.m);
      tp = &et;
    }
    const EikMatrix* ep = params.has_knowledge() ? &doc.eik : nullptr;
    double score = forward(params, tp, ep);
    out.push_back({doc.id, score, score >= threshold ? 1 : 0});
  }
  return out;
}

void write_history(std::ostream& out, const TrainHistory& h) {
  out << "epoch,train_loss,val_loss,val_f1\n";
  for (const auto& e : h.epochs)
    out << e.epoch << ',' << fmt_double(e.train_loss) << ','
        << fmt_double(e.val_loss) << ',' << fmt_double(e.val_f1) << '\n';
}

}  // namespace reldet
