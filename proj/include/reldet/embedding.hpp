#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "reldet/corpus.hpp"

namespace reldet {

// Word-to-index map with two reserved slots.
struct Vocab {
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  std::vector<std::string> words;  // index -> word, [0]="<pad>", [1]="<unk>"
  std::unordered_map<std::string, std::int32_t> index;

  std::size_t size() const { return words.size(); }  // includes pad + unk
  std::int32_t lookup(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? kUnk : it->second;
  }
  std::uint64_t fingerprint() const;
};

// Indexes every token with frequency >= min_freq over the given sequences.
// Ordering is frequency-descending, then lexicographic.
Vocab build_vocab(const std::vector<TokenSeq>& seqs, std::size_t min_freq);

struct EmbeddingTable {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;  // rows x dim, row-major

  double* row(std::size_t r) { return data.data() + r * dim; }
  const double* row(std::size_t r) const { return data.data() + r * dim; }
};

// Uniform [-0.05, 0.05] rows from a seeded generator; the padding row is
// zero and stays zero through training.
EmbeddingTable init_embeddings(const Vocab& vocab, std::size_t n,
                               std::uint64_t seed);

// Overwrites rows of in-vocabulary words from a plain-text
// "word v1 ... vn" stream. Unlisted words keep their initial rows.
void load_pretrained(EmbeddingTable& table, const Vocab& vocab,
                     std::istream& in);

// Fixed-capacity embedded document: the first min(len, m) tokens mapped to
// their vectors, remaining rows padding. `ids` holds the used row lookups.
struct EmbeddedText {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> data;       // m x n row-major
  std::vector<std::int32_t> ids;  // length min(len, m)
};

EmbeddedText embed(const TokenSeq& seq, const EmbeddingTable& table,
                   const Vocab& vocab, std::size_t m);

// Fast path when token ids are already known.
EmbeddedText embed_ids(const std::vector<std::int32_t>& ids,
                       const EmbeddingTable& table, std::size_t m);

}  // namespace reldet
