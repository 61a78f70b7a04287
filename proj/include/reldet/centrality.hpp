#pragma once

#include <set>
#include <string>
#include <vector>

#include "reldet/corpus.hpp"
#include "reldet/graph.hpp"

namespace reldet {

enum class EikScaling { None, Log1p };

enum class EikColumn { KC, BC, DC, PREV };

// One keyword's four scores. In raw (unscaled) form dc and prev are
// non-negative integers.
struct EikRow {
  std::string keyword;
  double kc = 0.0;
  double bc = 0.0;
  double dc = 0.0;
  double prev = 0.0;

  double col(EikColumn c) const;
  void set_col(EikColumn c, double v);
};

// K x 4 matrix of [KC, BC, DC, PREV] rows in keyword-spec order. The shape
// is the same for every document of a given spec; keywords absent from a
// document keep an all-zero row.
struct EikMatrix {
  std::vector<EikRow> rows;
  EikScaling scaling = EikScaling::None;

  std::size_t keyword_count() const { return rows.size(); }
  // Row-major K x 4 buffer in column order KC, BC, DC, PREV.
  std::vector<double> dense() const;
};

struct AblationMask {
  std::set<EikColumn> zeroed;
};

// Spreading-activation score of keyword `w`: the initial activation plus,
// for every other keyword present in the graph, activation divided by the
// unweighted shortest-path distance. Unreachable keywords contribute 0.
double keyword_centrality(const CooccurrenceGraph& g, const std::string& w,
                          const std::vector<std::string>& keywords,
                          double activation = 1.0);

// Occurrences of the canonical keyword in the token sequence.
std::size_t prevalence(const TokenSeq& seq, const std::string& keyword);

// Full pipeline for one document: tokenize, canonicalize keywords, build
// the co-occurrence network, then score every spec keyword.
EikMatrix build_eik_matrix(const Document& doc, const KeywordSpec& spec,
                           int window, EikScaling scaling);

// Same from an already canonicalized token sequence.
EikMatrix build_eik_from_seq(const TokenSeq& canonical,
                             const KeywordSpec& spec, int window,
                             EikScaling scaling);

// Returns a copy with the named columns set to zero everywhere.
EikMatrix apply_ablation(EikMatrix m, const AblationMask& mask);

EikColumn parse_eik_column(const std::string& name);
std::string eik_column_name(EikColumn c);

}  // namespace reldet
