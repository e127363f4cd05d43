#include "pathx/graph.hpp"

#include <algorithm>
#include <unordered_set>

namespace pathx {

namespace {
std::uint64_t edge_key(NodeId src, NodeId dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}
}  // namespace

NodeId NavGraph::add_node(std::string title) {
  auto [it, inserted] = title_index_.try_emplace(title, num_nodes());
  if (!inserted) throw DomainError("duplicate node title: " + title);
  NodeId id = it->second;
  nodes_.push_back({id, std::move(title)});
  out_adj_.emplace_back();
  in_adj_.emplace_back();
  return id;
}

EdgeId NavGraph::add_edge(NodeId src, NodeId dst) {
  if (src < 0 || src >= num_nodes() || dst < 0 || dst >= num_nodes())
    throw DanglingIdError("edge endpoint id out of range");
  if (src == dst) throw DomainError("self-loop rejected at node " + nodes_[src].title);
  auto [it, inserted] = edge_index_.try_emplace(edge_key(src, dst), num_edges());
  if (!inserted) return it->second;
  EdgeId id = it->second;
  edges_.push_back({id, src, dst});
  out_adj_[static_cast<std::size_t>(src)].push_back(id);
  in_adj_[static_cast<std::size_t>(dst)].push_back(id);
  return id;
}

NodeId NavGraph::find_title(std::string_view title) const {
  auto it = title_index_.find(std::string(title));
  return it == title_index_.end() ? kNoNode : it->second;
}

EdgeId NavGraph::find_edge(NodeId src, NodeId dst) const {
  auto it = edge_index_.find(edge_key(src, dst));
  return it == edge_index_.end() ? kNoEdge : it->second;
}

NavGraph build_graph(
    const std::vector<std::pair<std::string, std::string>>& edge_list,
    const std::vector<std::string>& node_titles) {
  NavGraph g;
  for (const auto& title : node_titles) g.add_node(title);
  for (const auto& [src, dst] : edge_list) {
    NodeId s = g.find_title(src);
    if (s == kNoNode) throw DanglingIdError("unknown endpoint title: " + src);
    NodeId d = g.find_title(dst);
    if (d == kNoNode) throw DanglingIdError("unknown endpoint title: " + dst);
    g.add_edge(s, d);
  }
  return g;
}

IncidenceMatrix incidence(const NavGraph& graph, IncidenceMode mode) {
  std::vector<std::tuple<int, int, double>> triplets;
  triplets.reserve(static_cast<std::size_t>(graph.num_edges()) * 2);
  for (const DirectedEdge& e : graph.edges()) {
    if (mode == IncidenceMode::Directed) {
      triplets.emplace_back(e.src, e.id, -1.0);
      triplets.emplace_back(e.dst, e.id, 1.0);
    } else {
      triplets.emplace_back(e.src, e.id, 1.0);
      triplets.emplace_back(e.dst, e.id, 1.0);
    }
  }
  return {mode, SparseMatrix::from_triplets(graph.num_nodes(), graph.num_edges(),
                                            std::move(triplets))};
}

double density(std::int64_t n, std::int64_t m) {
  if (n < 2) throw DomainError("density requires at least 2 nodes");
  return static_cast<double>(m) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

void apply_default_split(Trajectory& t, int horizon) {
  int len = t.length();
  t.prefix_len = std::max(1, len - horizon);
  t.horizon = len - t.prefix_len;
}

void validate_trajectory(const NavGraph& graph, const Trajectory& t) {
  if (t.length() < 2)
    throw DomainError("trajectory " + std::to_string(t.path_id) +
                      " shorter than 2 nodes");
  std::unordered_set<NodeId> seen;
  for (NodeId v : t.node_ids) {
    if (v < 0 || v >= graph.num_nodes())
      throw DanglingIdError("trajectory " + std::to_string(t.path_id) +
                            " references unknown node id " + std::to_string(v));
    if (!seen.insert(v).second)
      throw DomainError("trajectory " + std::to_string(t.path_id) +
                        " revisits node id " + std::to_string(v));
  }
  for (int i = 0; i + 1 < t.length(); ++i) {
    if (graph.find_edge(t.node_ids[i], t.node_ids[i + 1]) == kNoEdge)
      throw MissingEdgeError(
          "trajectory " + std::to_string(t.path_id) + " step " +
          std::to_string(i) + ": no edge " + std::to_string(t.node_ids[i]) +
          "->" + std::to_string(t.node_ids[i + 1]));
  }
  if (t.prefix_len < 1 || t.horizon < 1 || t.prefix_len + t.horizon != t.length())
    throw DomainError("trajectory " + std::to_string(t.path_id) +
                      " has inconsistent prefix/horizon split");
}

}  // namespace pathx
