#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reldet/centrality.hpp"
#include "reldet/corpus.hpp"
#include "reldet/embedding.hpp"

namespace reldet {

// Everything upstream of the model that changes what a document looks like
// to it. Two pipelines are interchangeable iff their fingerprints match.
struct FeatureOptions {
  int window = 5;
  EikScaling scaling = EikScaling::Log1p;
  std::size_t m = 500;       // sequence capacity of the text branch
  std::size_t min_freq = 2;  // vocabulary frequency threshold
  bool stem = false;
  std::set<std::string> stopwords;

  std::uint64_t stopwords_hash() const;
};

struct DocFeatures {
  std::string id;
  std::optional<int> label;
  std::vector<std::int32_t> token_ids;  // canonicalized, truncated to m
  EikMatrix eik;
};

struct FeatureSet {
  std::uint64_t fingerprint = 0;       // pipeline identity (spec+opts+vocab)
  std::uint64_t spec_fingerprint = 0;  // keyword spec alone
  FeatureOptions opts;
  Vocab vocab;
  std::vector<std::string> keywords;  // canonical names in spec order
  std::vector<DocFeatures> docs;
};

// tokenize -> optional stopword removal -> optional stemming -> keyword
// canonicalization.
TokenSeq preprocess(const Document& doc, const KeywordSpec& spec,
                    const FeatureOptions& opts);

std::uint64_t feature_fingerprint(const KeywordSpec& spec,
                                  const FeatureOptions& opts,
                                  const Vocab& vocab);

// Builds the vocabulary from these documents, then featurizes them.
FeatureSet featurize(const std::vector<Document>& docs,
                     const KeywordSpec& spec, const FeatureOptions& opts);

// Featurizes with an existing vocabulary (evaluation / inference corpora).
FeatureSet featurize_with_vocab(const std::vector<Document>& docs,
                                const KeywordSpec& spec,
                                const FeatureOptions& opts,
                                const Vocab& vocab);

// Zeroes the masked EIK columns in every document of the set.
void ablate_features(FeatureSet& fs, const AblationMask& mask);

}  // namespace reldet
