#include "reldet/graph.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <set>

#include "reldet/errors.hpp"

namespace reldet {

int CooccurrenceGraph::node_id(const std::string& name) const {
  auto it = index.find(name);
  if (it == index.end())
    throw ConfigError("graph: node \"" + name + "\" not present");
  return it->second;
}

CooccurrenceGraph build_cooccurrence(const TokenSeq& seq, int window) {
  if (window < 2) throw ConfigError("co-occurrence window must be >= 2");
  CooccurrenceGraph g;
  g.window = window;
  for (const auto& tok : seq.tokens) {
    if (!g.index.count(tok)) {
      g.index.emplace(tok, static_cast<int>(g.nodes.size()));
      g.nodes.push_back(tok);
    }
  }
  std::set<std::pair<int, int>> edges;
  const std::size_t n = seq.tokens.size();
  const auto span = static_cast<std::size_t>(window - 1);
  for (std::size_t i = 0; i < n; ++i) {
    int a = g.index[seq.tokens[i]];
    for (std::size_t j = i + 1; j < n && j - i <= span; ++j) {
      int b = g.index[seq.tokens[j]];
      if (a == b) continue;
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  g.adj.resize(g.nodes.size());
  for (const auto& [a, b] : edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
  return g;
}

DistanceMap bfs_distances(const CooccurrenceGraph& g,
                          const std::string& source) {
  DistanceMap dm;
  dm.source = g.node_id(source);
  dm.dist.assign(g.node_count(), DistanceMap::kUnreachable);
  dm.dist[dm.source] = 0;
  std::deque<int> queue{dm.source};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : g.adj[v]) {
      if (dm.dist[w] < 0) {
        dm.dist[w] = dm.dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dm;
}

std::vector<double> betweenness_all(const CooccurrenceGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);
  std::vector<int> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::vector<int>> pred(n);
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : pred) p.clear();
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    std::deque<int> queue{static_cast<int>(s)};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : g.adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int w = *it;
      for (int v : pred[w])
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != static_cast<int>(s)) bc[w] += delta[w];
    }
  }
  for (double& v : bc) v /= 2.0;  // each unordered pair visited twice
  return bc;
}

double betweenness(const CooccurrenceGraph& g, const std::string& node) {
  int id = g.node_id(node);
  return betweenness_all(g)[id];
}

int degree(const CooccurrenceGraph& g, const std::string& node) {
  return static_cast<int>(g.adj[g.node_id(node)].size());
}

void write_edge_list(std::ostream& out, const CooccurrenceGraph& g) {
  for (std::size_t a = 0; a < g.adj.size(); ++a)
    for (int b : g.adj[a])
      if (static_cast<int>(a) < b) out << g.nodes[a] << '\t' << g.nodes[b] << '\n';
}

}  // namespace reldet
