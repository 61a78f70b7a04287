#include "reldet/embedding.hpp"

#include <algorithm>
#include <istream>
#include <random>
#include <sstream>

#include "reldet/errors.hpp"
#include "reldet/util.hpp"

namespace reldet {

std::uint64_t Vocab::fingerprint() const {
  Fnv64 h;
  h.u64(words.size());
  for (const auto& w : words) h.str(w);
  return h.value();
}

Vocab build_vocab(const std::vector<TokenSeq>& seqs, std::size_t min_freq) {
  if (min_freq < 1) throw ConfigError("build_vocab: min_freq must be >= 1");
  if (seqs.empty()) throw DataError("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& s : seqs)
    for (const auto& t : s.tokens) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [w, f] : freq)
    if (f >= min_freq) kept.emplace_back(w, f);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  v.words = {"<pad>", "<unk>"};
  for (const auto& [w, f] : kept) v.words.push_back(w);
  for (std::size_t i = 0; i < v.words.size(); ++i)
    v.index.emplace(v.words[i], static_cast<std::int32_t>(i));
  return v;
}

EmbeddingTable init_embeddings(const Vocab& vocab, std::size_t n,
                               std::uint64_t seed) {
  if (n < 1) throw ConfigError("init_embeddings: dimension must be >= 1");
  EmbeddingTable t;
  t.rows = vocab.size();
  t.dim = n;
  t.data.assign(t.rows * n, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (std::size_t r = 1; r < t.rows; ++r)  // row 0 stays zero (padding)
    for (std::size_t c = 0; c < n; ++c) t.data[r * n + c] = dist(rng);
  return t;
}

void load_pretrained(EmbeddingTable& table, const Vocab& vocab,
                     std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    auto it = vocab.index.find(word);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.size() != table.dim)
      throw DataError("pretrained vectors line " + std::to_string(lineno) +
                      ": expected " + std::to_string(table.dim) +
                      " values, got " + std::to_string(vals.size()));
    if (it == vocab.index.end() || it->second == Vocab::kPad) continue;
    std::copy(vals.begin(), vals.end(),
              table.row(static_cast<std::size_t>(it->second)));
  }
}

EmbeddedText embed_ids(const std::vector<std::int32_t>& ids,
                       const EmbeddingTable& table, std::size_t m) {
  EmbeddedText e;
  e.m = m;
  e.n = table.dim;
  e.data.assign(m * table.dim, 0.0);
  std::size_t used = std::min(ids.size(), m);
  e.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(used));
  for (std::size_t r = 0; r < used; ++r)
    std::copy(table.row(static_cast<std::size_t>(e.ids[r])),
              table.row(static_cast<std::size_t>(e.ids[r])) + table.dim,
              e.data.begin() + static_cast<std::ptrdiff_t>(r * table.dim));
  return e;
}

EmbeddedText embed(const TokenSeq& seq, const EmbeddingTable& table,
                   const Vocab& vocab, std::size_t m) {
  std::vector<std::int32_t> ids;
  ids.reserve(std::min(seq.tokens.size(), m));
  for (std::size_t i = 0; i < seq.tokens.size() && i < m; ++i)
    ids.push_back(vocab.lookup(seq.tokens[i]));
  return embed_ids(ids, table, m);
}

}  // namespace reldet
