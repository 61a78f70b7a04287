#include "reldet/centrality.hpp"

#include <cmath>

#include "reldet/errors.hpp"
#include "reldet/util.hpp"

namespace reldet {

double EikRow::col(EikColumn c) const {
  switch (c) {
    case EikColumn::KC:
      return kc;
    case EikColumn::BC:
      return bc;
    case EikColumn::DC:
      return dc;
    case EikColumn::PREV:
      return prev;
  }
  return 0.0;
}

void EikRow::set_col(EikColumn c, double v) {
  switch (c) {
    case EikColumn::KC:
      kc = v;
      break;
    case EikColumn::BC:
      bc = v;
      break;
    case EikColumn::DC:
      dc = v;
      break;
    case EikColumn::PREV:
      prev = v;
      break;
  }
}

std::vector<double> EikMatrix::dense() const {
  std::vector<double> out;
  out.reserve(rows.size() * 4);
  for (const auto& r : rows) {
    out.push_back(r.kc);
    out.push_back(r.bc);
    out.push_back(r.dc);
    out.push_back(r.prev);
  }
  return out;
}

double keyword_centrality(const CooccurrenceGraph& g, const std::string& w,
                          const std::vector<std::string>& keywords,
                          double activation) {
  if (!(activation > 0.0))
    throw ConfigError("keyword_centrality: activation must be > 0");
  if (!g.has_node(w))
    throw ConfigError("keyword_centrality: keyword \"" + w +
                      "\" not in graph");
  DistanceMap dm = bfs_distances(g, w);
  double total = activation;
  for (const auto& k : keywords) {
    if (k == w || !g.has_node(k)) continue;
    int id = g.node_id(k);
    if (!dm.reachable(id)) continue;  // no path: spreading activation is 0
    total += activation / static_cast<double>(dm.dist[id]);
  }
  return total;
}

std::size_t prevalence(const TokenSeq& seq, const std::string& keyword) {
  std::size_t count = 0;
  for (const auto& t : seq.tokens)
    if (t == keyword) ++count;
  return count;
}

EikMatrix build_eik_from_seq(const TokenSeq& canonical,
                             const KeywordSpec& spec, int window,
                             EikScaling scaling) {
  CooccurrenceGraph g = build_cooccurrence(canonical, window);
  std::vector<double> bc_all = betweenness_all(g);
  std::vector<std::string> names = spec.names();
  EikMatrix m;
  m.rows.reserve(spec.entries.size());
  for (const auto& entry : spec.entries) {
    EikRow row;
    row.keyword = entry.name;
    if (g.has_node(entry.name)) {
      int id = g.node_id(entry.name);
      row.kc = keyword_centrality(g, entry.name, names, 1.0);
      row.bc = bc_all[id];
      row.dc = static_cast<double>(g.adj[id].size());
      row.prev = static_cast<double>(prevalence(canonical, entry.name));
    }
    m.rows.push_back(std::move(row));
  }
  if (scaling == EikScaling::Log1p) {
    for (auto& r : m.rows) {
      r.kc = std::log1p(r.kc);
      r.bc = std::log1p(r.bc);
      r.dc = std::log1p(r.dc);
      r.prev = std::log1p(r.prev);
    }
  }
  m.scaling = scaling;
  return m;
}

EikMatrix build_eik_matrix(const Document& doc, const KeywordSpec& spec,
                           int window, EikScaling scaling) {
  TokenSeq canonical = match_keywords(tokenize(doc.title, doc.body), spec);
  return build_eik_from_seq(canonical, spec, window, scaling);
}

EikMatrix apply_ablation(EikMatrix m, const AblationMask& mask) {
  for (auto& row : m.rows)
    for (EikColumn c : mask.zeroed) row.set_col(c, 0.0);
  return m;
}

EikColumn parse_eik_column(const std::string& name) {
  if (name == "kc" || name == "KC") return EikColumn::KC;
  if (name == "bc" || name == "BC") return EikColumn::BC;
  if (name == "dc" || name == "DC") return EikColumn::DC;
  if (name == "prev" || name == "PREV") return EikColumn::PREV;
  throw ConfigError("unknown EIK column \"" + name + "\"");
}

std::string eik_column_name(EikColumn c) {
  switch (c) {
    case EikColumn::KC:
      return "KC";
    case EikColumn::BC:
      return "BC";
    case EikColumn::DC:
      return "DC";
    case EikColumn::PREV:
      return "PREV";
  }
  return "?";
}

}  // namespace reldet
