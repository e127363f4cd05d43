#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pathx/matrix.hpp"
#include "pathx/types.hpp"

namespace pathx {

struct ArticleNode {
  NodeId id = kNoNode;
  std::string title;
};

struct DirectedEdge {
  EdgeId id = kNoEdge;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
};

/// Directed article graph with dense 0-based node/edge ids and ordered
/// in/out adjacency (edge-id lists). Treated as immutable once built;
/// reads are safe to share across threads.
class NavGraph {
 public:
  NavGraph() = default;

  /// Adds a node; titles must be unique. Returns the new id.
  NodeId add_node(std::string title);

  /// Adds an edge by node ids. Self-loops are rejected; a duplicate
  /// (src,dst) collapses to the existing edge id.
  EdgeId add_edge(NodeId src, NodeId dst);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<ArticleNode>& nodes() const { return nodes_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }
  const ArticleNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const DirectedEdge& edge(EdgeId id) const { return edges_[static_cast<std::size_t>(id)]; }

  std::span<const EdgeId> out_edges(NodeId id) const {
    return {out_adj_[static_cast<std::size_t>(id)].data(),
            out_adj_[static_cast<std::size_t>(id)].size()};
  }
  std::span<const EdgeId> in_edges(NodeId id) const {
    return {in_adj_[static_cast<std::size_t>(id)].data(),
            in_adj_[static_cast<std::size_t>(id)].size()};
  }
  int out_degree(NodeId id) const { return static_cast<int>(out_edges(id).size()); }
  int in_degree(NodeId id) const { return static_cast<int>(in_edges(id).size()); }

  /// kNoNode when the title is unknown.
  NodeId find_title(std::string_view title) const;
  /// kNoEdge when no such edge exists.
  EdgeId find_edge(NodeId src, NodeId dst) const;

 private:
  std::vector<ArticleNode> nodes_;
  std::vector<DirectedEdge> edges_;
  std::vector<std::vector<EdgeId>> out_adj_;
  std::vector<std::vector<EdgeId>> in_adj_;
  std::unordered_map<std::string, NodeId> title_index_;
  std::unordered_map<std::uint64_t, EdgeId> edge_index_;  // key src<<32|dst
};

/// Builds a graph from titles. Node ids follow node_titles order, edge ids
/// follow edge_list order with duplicates collapsed. Unknown endpoint
/// titles raise DanglingIdError naming the title.
NavGraph build_graph(
    const std::vector<std::pair<std::string, std::string>>& edge_list,
    const std::vector<std::string>& node_titles);

enum class IncidenceMode { Undirected, Directed };

/// n x m node-by-edge incidence. Every column has exactly two nonzeros:
/// undirected 1/1, directed -1 at the source and +1 at the destination.
struct IncidenceMatrix {
  IncidenceMode mode = IncidenceMode::Undirected;
  SparseMatrix mat;
};

IncidenceMatrix incidence(const NavGraph& graph, IncidenceMode mode);

/// m / (n * (n - 1)) for a loop-free digraph. Requires n >= 2.
double density(std::int64_t n, std::int64_t m);

/// An observed navigation path, split into a prefix of length prefix_len
/// and a suffix of length horizon (= size - prefix_len).
struct Trajectory {
  PathId path_id = 0;
  std::vector<NodeId> node_ids;
  int prefix_len = 1;
  int horizon = 1;

  int length() const { return static_cast<int>(node_ids.size()); }
  bool operator==(const Trajectory&) const = default;
};

/// Default prefix split: keep `horizon` nodes as the suffix, at least one
/// node in the prefix.
void apply_default_split(Trajectory& t, int horizon = 2);

/// Checks ids, no-repeat rule, and that every step is a graph edge.
void validate_trajectory(const NavGraph& graph, const Trajectory& t);

}  // namespace pathx
