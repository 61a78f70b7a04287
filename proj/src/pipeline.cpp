#include "reldet/pipeline.hpp"

#include <algorithm>

#include "reldet/errors.hpp"
#include "reldet/util.hpp"

namespace reldet {

std::uint64_t FeatureOptions::stopwords_hash() const {
  if (stopwords.empty()) return 0;
  Fnv64 h;
  for (const auto& w : stopwords) h.str(w);  // std::set iterates sorted
  return h.value();
}

namespace {

// Light suffix stripper, applied only when opts.stem is set.
std::string strip_suffix(const std::string& t) {
  auto ends_with = [&](const char* suf) {
    std::size_t n = std::char_traits<char>::length(suf);
    return t.size() > n + 2 && t.compare(t.size() - n, n, suf) == 0;
  };
  if (ends_with("ing")) return t.substr(0, t.size() - 3);
  if (ends_with("ed")) return t.substr(0, t.size() - 2);
  if (ends_with("es")) return t.substr(0, t.size() - 2);
  if (ends_with("s") && t.back() == 's' && t[t.size() - 2] != 's')
    return t.substr(0, t.size() - 1);
  return t;
}

}  // namespace

TokenSeq preprocess(const Document& doc, const KeywordSpec& spec,
                    const FeatureOptions& opts) {
  TokenSeq seq = tokenize(doc.title, doc.body);
  if (!opts.stopwords.empty()) {
    std::vector<std::string> kept;
    kept.reserve(seq.tokens.size());
    for (auto& t : seq.tokens)
      if (!opts.stopwords.count(t)) kept.push_back(std::move(t));
    seq.tokens = std::move(kept);
  }
  if (opts.stem)
    for (auto& t : seq.tokens) t = strip_suffix(t);
  return match_keywords(seq, spec);
}

std::uint64_t feature_fingerprint(const KeywordSpec& spec,
                                  const FeatureOptions& opts,
                                  const Vocab& vocab) {
  Fnv64 h;
  h.u64(spec.fingerprint());
  h.u64(static_cast<std::uint64_t>(opts.window));
  h.u64(static_cast<std::uint64_t>(opts.scaling));
  h.u64(opts.m);
  h.u64(opts.min_freq);
  h.u64(opts.stem ? 1 : 0);
  h.u64(opts.stopwords_hash());
  h.u64(vocab.fingerprint());
  return h.value();
}

namespace {

FeatureSet featurize_impl(const std::vector<Document>& docs,
                          const KeywordSpec& spec, const FeatureOptions& opts,
                          const std::vector<TokenSeq>& seqs,
                          Vocab vocab) {
  FeatureSet fs;
  fs.opts = opts;
  fs.vocab = std::move(vocab);
  fs.keywords = spec.names();
  fs.spec_fingerprint = spec.fingerprint();
  fs.fingerprint = feature_fingerprint(spec, opts, fs.vocab);
  fs.docs.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    DocFeatures df;
    df.id = docs[i].id;
    df.label = docs[i].label;
    const auto& seq = seqs[i];
    for (std::size_t t = 0; t < seq.tokens.size() && t < opts.m; ++t)
      df.token_ids.push_back(fs.vocab.lookup(seq.tokens[t]));
    df.eik = build_eik_from_seq(seq, spec, opts.window, opts.scaling);
    fs.docs.push_back(std::move(df));
  }
  return fs;
}

}  // namespace

FeatureSet featurize(const std::vector<Document>& docs,
                     const KeywordSpec& spec, const FeatureOptions& opts) {
  std::vector<TokenSeq> seqs;
  seqs.reserve(docs.size());
  for (const auto& d : docs) seqs.push_back(preprocess(d, spec, opts));
  Vocab vocab = build_vocab(seqs, opts.min_freq);
  return featurize_impl(docs, spec, opts, seqs, std::move(vocab));
}

FeatureSet featurize_with_vocab(const std::vector<Document>& docs,
                                const KeywordSpec& spec,
                                const FeatureOptions& opts,
                                const Vocab& vocab) {
  std::vector<TokenSeq> seqs;
  seqs.reserve(docs.size());
  for (const auto& d : docs) seqs.push_back(preprocess(d, spec, opts));
  return featurize_impl(docs, spec, opts, seqs, vocab);
}

void ablate_features(FeatureSet& fs, const AblationMask& mask) {
  for (auto& d : fs.docs) d.eik = apply_ablation(std::move(d.eik), mask);
}

}  // namespace reldet
