#pragma once

#include <utility>
#include <vector>

#include "pathx/graph.hpp"
#include "pathx/matrix.hpp"
#include "pathx/model.hpp"

namespace pathx::serial_ref {

/// Serial from-the-definition counterparts of the OpenMP kernels. They
/// recompute everything from first principles (materialized incidence
/// rows, dense operator matrices, explicit triple enumeration) so tests
/// can check the optimized paths against an independent route, and the
/// benchmark has a baseline.

/// Cosine of explicit undirected incidence rows, per edge.
std::vector<double> similarity_hyperedge(const NavGraph& graph);

/// Dual in/out degrees by enumerating every (node, in-edge, out-edge)
/// triple straight from the directed incidence matrix.
std::vector<std::pair<double, double>> dhnode_in_out_degree(const NavGraph& graph);

/// Plain per-edge MLP evaluation, single thread.
std::vector<double> edge_logits(const ModelParameters& params,
                                const PseudoCoordinates& coords,
                                const Matrix& node_features,
                                const Matrix& edge_features, const NavGraph& graph);

/// Dense m x n lift matrix B: row e has w(e) at column src(e).
Matrix dense_lift(const EdgeWeights& weights, const NavGraph& graph);

/// Dense m x m transition matrix with the non-backtracking rule applied
/// entry by entry.
Matrix dense_transition(const EdgeWeights& weights, const NavGraph& graph);

/// Propagation through explicit dense matrix products.
AgentState propagate_dense(const EdgeWeights& weights, const NavGraph& graph,
                           const AgentState& x_t, int h, ProjectionMode mode);

}  // namespace pathx::serial_ref
