#include "reldet/config.hpp"

#include <filesystem>
#include <fstream>
#include <istream>

#include "reldet/errors.hpp"
#include "reldet/util.hpp"

namespace reldet {

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " must be true or false, got \"" + v +
                    "\"");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " must be a non-negative integer, "
                      "got \"" + v + "\"");
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " must be a number, got \"" + v +
                      "\"");
  }
}

SynthRule parse_rule(const std::string& v) {
  if (v == "proximity") return SynthRule::Proximity;
  if (v == "cross_group" || v == "cross-group") return SynthRule::CrossGroup;
  if (v == "frequency") return SynthRule::Frequency;
  throw ConfigError("config: synth.rule must be proximity, cross_group or "
                    "frequency, got \"" + v + "\"");
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "corpus") c.corpus = value;
  else if (key == "keywords") c.keywords = value;
  else if (key == "model") c.model = value;
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "stopwords") c.stopwords = value;
  else if (key == "pretrained") c.pretrained = value;
  else if (key == "dump_graphs") c.dump_graphs = parse_bool(key, value);
  else if (key == "topic") c.topic = value;
  else if (key == "window") c.window = static_cast<int>(parse_u64(key, value));
  else if (key == "scaling") c.scaling = value;
  else if (key == "m") c.m = parse_u64(key, value);
  else if (key == "n") c.n = parse_u64(key, value);
  else if (key == "min_freq") c.min_freq = parse_u64(key, value);
  else if (key == "stem") c.stem = parse_bool(key, value);
  else if (key == "variant") c.variant = value;
  else if (key == "lr") c.lr = parse_f64(key, value);
  else if (key == "epochs") c.epochs = parse_u64(key, value);
  else if (key == "batch_size") c.batch_size = parse_u64(key, value);
  else if (key == "patience") c.patience = parse_u64(key, value);
  else if (key == "threshold") c.threshold = parse_f64(key, value);
  else if (key == "val_fraction") c.val_fraction = parse_f64(key, value);
  else if (key == "test_fraction") c.test_fraction = parse_f64(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "fractions") {
    c.fractions.clear();
    for (const auto& part : split(value, ','))
      if (!trim(part).empty()) c.fractions.push_back(parse_f64(key, trim(part)));
  } else if (key == "synth.n_docs") c.synth.n_docs = parse_u64(key, value);
  else if (key == "synth.vocab_size") c.synth.vocab_size = parse_u64(key, value);
  else if (key == "synth.rule") c.synth.rule = parse_rule(value);
  else if (key == "synth.seed") c.synth.seed = parse_u64(key, value);
  else if (key == "synth.rule_window") c.synth.rule_window = parse_u64(key, value);
  else if (key == "synth.freq_threshold") c.synth.freq_threshold = parse_u64(key, value);
  else if (key == "synth.positive_fraction") c.synth.positive_fraction = parse_f64(key, value);
  else if (key == "synth.balance_tolerance") c.synth.balance_tolerance = parse_f64(key, value);
  else if (key == "synth.len_min") c.synth.len_min = parse_u64(key, value);
  else if (key == "synth.len_max") c.synth.len_max = parse_u64(key, value);
  else if (key == "synth.matched_counts") c.synth.matched_counts = parse_bool(key, value);
  else throw ConfigError("config: unknown key \"" + key + "\"");
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  return parse_run_config(in);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override \"" + assignment + "\" is not key=value");
  set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

FeatureOptions RunConfig::feature_options() const {
  FeatureOptions opts;
  opts.window = window;
  opts.scaling = scaling_enum();
  opts.m = m;
  opts.min_freq = min_freq;
  opts.stem = stem;
  if (!stopwords.empty()) {
    std::ifstream in(stopwords);
    if (!in)
      throw ConfigError("cannot open stopword file \"" + stopwords + "\"");
    std::string word;
    while (in >> word) opts.stopwords.insert(to_lower_ascii(word));
  }
  return opts;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = lr;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.patience = patience;
  t.seed = seed;
  t.threshold = threshold;
  return t;
}

Variant RunConfig::variant_enum() const { return parse_variant(variant); }

EikScaling RunConfig::scaling_enum() const {
  if (scaling == "log1p") return EikScaling::Log1p;
  if (scaling == "none") return EikScaling::None;
  throw ConfigError("config: scaling must be log1p or none, got \"" +
                    scaling + "\"");
}

ModelShape RunConfig::model_shape() const {
  ModelShape s;
  s.m = m;
  s.n = n;
  return s;
}

void RunConfig::validate(const std::vector<std::string>& need) const {
  if (window < 2) throw ConfigError("config: window must be >= 2");
  scaling_enum();
  variant_enum();
  if (m < 5) throw ConfigError("config: m must be >= 5");
  if (n < 1) throw ConfigError("config: n must be >= 1");
  if (min_freq < 1) throw ConfigError("config: min_freq must be >= 1");
  if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("config: lr must be > 0");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw ConfigError("config: val_fraction must be in [0, 1)");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ConfigError("config: test_fraction must be in [0, 1)");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw ConfigError("config: fractions must lie in (0, 1]");
  for (const auto& key : need) {
    const std::string* path = nullptr;
    bool must_exist = true;
    if (key == "corpus") path = &corpus;
    else if (key == "corpus_out") { path = &corpus; must_exist = false; }
    else if (key == "keywords") path = &keywords;
    else if (key == "model_in") path = &model;
    else if (key == "model_out") { path = &model; must_exist = false; }
    if (!path) continue;
    if (path->empty())
      throw ConfigError("config: \"" + key + "\" path is required");
    if (must_exist && !std::filesystem::exists(*path))
      throw ConfigError("config: " + key + " file \"" + *path +
                        "\" does not exist");
  }
}

}  // namespace reldet
