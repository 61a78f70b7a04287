#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "reldet/corpus.hpp"
#include "reldet/nn.hpp"
#include "reldet/pipeline.hpp"

namespace reldet {

// Single key=value configuration driving every CLI command, so that
// experiment variants share all upstream choices.
struct RunConfig {
  // paths
  std::string corpus;
  std::string keywords;
  std::string model;
  std::string out_dir = "out";
  std::string stopwords;       // optional stopword list, one token per line
  std::string pretrained;      // optional "word v1 .. vn" embedding file
  bool dump_graphs = false;    // featurize: write per-document edge lists
  std::string topic = "default";

  // featurization
  int window = 5;
  std::string scaling = "log1p";  // or "none"
  std::size_t m = 500;
  std::size_t n = 50;
  std::size_t min_freq = 2;
  bool stem = false;

  // model / training
  std::string variant = "inn";
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  double threshold = 0.5;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 42;
  std::vector<double> fractions = {0.01, 0.1, 0.3, 1.0};

  // synthetic generation
  SynthConfig synth;

  FeatureOptions feature_options() const;  // loads the stopword file
  TrainConfig train_config() const;
  Variant variant_enum() const;
  EikScaling scaling_enum() const;
  ModelShape model_shape() const;

  // Ranges and referenced paths; `need` lists the path keys a command uses.
  void validate(const std::vector<std::string>& need) const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace reldet
