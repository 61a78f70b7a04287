#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "reldet/corpus.hpp"

namespace reldet {

// Undirected, unweighted word co-occurrence network of one document.
// Immutable after construction; queries are read-only.
struct CooccurrenceGraph {
  std::vector<std::string> nodes;  // first-occurrence order
  std::unordered_map<std::string, int> index;
  std::vector<std::vector<int>> adj;  // sorted, deduplicated neighbor lists
  int window = 0;

  bool has_node(const std::string& name) const {
    return index.count(name) != 0;
  }
  // Throws ConfigError when the node is absent.
  int node_id(const std::string& name) const;
  std::size_t node_count() const { return nodes.size(); }
};

// Connects distinct tokens that co-occur within any window of `window`
// consecutive positions. No self-loops; repeated tokens share one node.
CooccurrenceGraph build_cooccurrence(const TokenSeq& seq, int window);

struct DistanceMap {
  static constexpr int kUnreachable = -1;
  int source = 0;
  std::vector<int> dist;  // indexed by node id; kUnreachable if no path

  bool reachable(int node) const { return dist[node] >= 0; }
};

// Exact unweighted shortest-path lengths from `source` (breadth-first).
DistanceMap bfs_distances(const CooccurrenceGraph& g,
                          const std::string& source);

// Betweenness of every node: for unordered pairs {j,k} with j != k, the
// fraction of shortest j-k paths passing through the node as an interior
// vertex (endpoints excluded). Brandes accumulation, halved for the
// undirected pair convention.
std::vector<double> betweenness_all(const CooccurrenceGraph& g);

double betweenness(const CooccurrenceGraph& g, const std::string& node);

// Count of distinct neighbors.
int degree(const CooccurrenceGraph& g, const std::string& node);

// Edge list dump, "node_a<TAB>node_b" per line.
void write_edge_list(std::ostream& out, const CooccurrenceGraph& g);

}  // namespace reldet
