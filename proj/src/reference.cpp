#include "pathx/reference.hpp"

#include <algorithm>
#include <cmath>

namespace pathx::serial_ref {

std::vector<double> similarity_hyperedge(const NavGraph& graph) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  Matrix M = incidence(graph, IncidenceMode::Undirected).mat.to_dense();
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int e = 0; e < m; ++e) {
    const int v = graph.edge(e).src;
    const int u = graph.edge(e).dst;
    double dot = 0.0, nv = 0.0, nu = 0.0;
    for (int c = 0; c < m; ++c) {
      dot += M(v, c) * M(u, c);
      nv += M(v, c) * M(v, c);
      nu += M(u, c) * M(u, c);
    }
    (void)n;
    double denom_sq = nv * nu;
    out[static_cast<std::size_t>(e)] = denom_sq > 0.0 ? dot / std::sqrt(denom_sq) : 0.0;
  }
  return out;
}

std::vector<std::pair<double, double>> dhnode_in_out_degree(const NavGraph& graph) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  Matrix M = incidence(graph, IncidenceMode::Directed).mat.to_dense();

  std::vector<std::int64_t> raw_in(static_cast<std::size_t>(m), 0);
  std::vector<std::int64_t> raw_out(static_cast<std::size_t>(m), 0);
  // a walk e_i -> e_j passes through node l when e_i enters l (+1 in M)
  // and e_j leaves l (-1 in M)
  for (int l = 0; l < n; ++l) {
    for (int ei = 0; ei < m; ++ei) {
      if (M(l, ei) != 1.0) continue;
      for (int ej = 0; ej < m; ++ej) {
        if (M(l, ej) != -1.0) continue;
        raw_out[static_cast<std::size_t>(ei)]++;
        raw_in[static_cast<std::size_t>(ej)]++;
      }
    }
  }
  std::int64_t d_max = 0;
  for (int e = 0; e < m; ++e)
    d_max = std::max({d_max, raw_in[static_cast<std::size_t>(e)],
                      raw_out[static_cast<std::size_t>(e)]});
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(m), {0.0, 0.0});
  if (d_max == 0) return out;
  for (int e = 0; e < m; ++e)
    out[static_cast<std::size_t>(e)] = {
        static_cast<double>(raw_in[static_cast<std::size_t>(e)]) /
            static_cast<double>(d_max),
        static_cast<double>(raw_out[static_cast<std::size_t>(e)]) /
            static_cast<double>(d_max)};
  return out;
}

std::vector<double> edge_logits(const ModelParameters& params,
                                const PseudoCoordinates& coords,
                                const Matrix& node_features,
                                const Matrix& edge_features, const NavGraph& graph) {
  const int m = graph.num_edges();
  const std::vector<int>& hidden = params.shape().hidden;
  std::vector<double> logits(static_cast<std::size_t>(m), 0.0);
  for (int e = 0; e < m; ++e) {
    const DirectedEdge& edge = graph.edge(e);
    std::vector<double> in;
    in.push_back(coords.values(edge.src, 0));
    in.push_back(coords.values(edge.src, 1));
    in.push_back(coords.values(edge.dst, 0));
    in.push_back(coords.values(edge.dst, 1));
    for (int c = 0; c < node_features.cols(); ++c) in.push_back(node_features(edge.src, c));
    for (int c = 0; c < node_features.cols(); ++c) in.push_back(node_features(edge.dst, c));
    for (int c = 0; c < edge_features.cols(); ++c) in.push_back(edge_features(e, c));

    const double* p = params.flat().data();
    std::vector<double> cur = in;
    std::vector<int> widths;
    widths.push_back(static_cast<int>(in.size()));
    for (int h : hidden) widths.push_back(h);
    widths.push_back(1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const int in_w = widths[l];
      const int out_w = widths[l + 1];
      std::vector<double> nxt(static_cast<std::size_t>(out_w), 0.0);
      for (int o = 0; o < out_w; ++o) {
        double s = 0.0;
        for (int i = 0; i < in_w; ++i) s += p[o * in_w + i] * cur[static_cast<std::size_t>(i)];
        nxt[static_cast<std::size_t>(o)] = s;
      }
      p += in_w * out_w;
      for (int o = 0; o < out_w; ++o) nxt[static_cast<std::size_t>(o)] += p[o];
      p += out_w;
      if (l + 2 < widths.size())
        for (double& v : nxt) v = std::tanh(v);
      cur = std::move(nxt);
    }
    logits[static_cast<std::size_t>(e)] = cur[0];
  }
  return logits;
}

Matrix dense_lift(const EdgeWeights& weights, const NavGraph& graph) {
  Matrix B(graph.num_edges(), graph.num_nodes());
  for (const DirectedEdge& e : graph.edges())
    B(e.id, e.src) = weights.weights[static_cast<std::size_t>(e.id)];
  return B;
}

Matrix dense_transition(const EdgeWeights& weights, const NavGraph& graph) {
  const int m = graph.num_edges();
  Matrix P(m, m);
  for (int f = 0; f < m; ++f) {
    const DirectedEdge& ef = graph.edge(f);  // i -> j
    EdgeId bt = graph.find_edge(ef.dst, ef.src);
    double den = bt == kNoEdge ? 1.0 : 1.0 - weights.weights[static_cast<std::size_t>(bt)];
    for (int g = 0; g < m; ++g) {
      const DirectedEdge& eg = graph.edge(g);  // k -> l
      if (eg.src != ef.dst || eg.dst == ef.src) continue;  // j != k or i = l
      if (den <= 0.0) continue;                            // trapped row stays zero
      P(f, g) = weights.weights[static_cast<std::size_t>(g)] / den;
    }
  }
  return P;
}

AgentState propagate_dense(const EdgeWeights& weights, const NavGraph& graph,
                           const AgentState& x_t, int h, ProjectionMode mode) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  Matrix B = dense_lift(weights, graph);
  Matrix P = dense_transition(weights, graph);

  std::vector<double> mass(static_cast<std::size_t>(m), 0.0);
  for (int e = 0; e < m; ++e)
    for (int v = 0; v < n; ++v) mass[static_cast<std::size_t>(e)] += B(e, v) * x_t.x[static_cast<std::size_t>(v)];

  const int steps = mode == ProjectionMode::HeadProjection ? h - 1 : h;
  for (int s = 0; s < steps; ++s) {
    std::vector<double> next(static_cast<std::size_t>(m), 0.0);
    for (int g = 0; g < m; ++g)
      for (int f = 0; f < m; ++f)
        next[static_cast<std::size_t>(g)] += P(f, g) * mass[static_cast<std::size_t>(f)];
    mass = std::move(next);
  }

  AgentState out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  if (mode == ProjectionMode::HeadProjection) {
    for (int e = 0; e < m; ++e)
      out.x[static_cast<std::size_t>(graph.edge(e).dst)] += mass[static_cast<std::size_t>(e)];
  } else {
    // dense Moore-Penrose pseudoinverse of B via its orthogonal columns
    Matrix Bp(n, m);
    for (int v = 0; v < n; ++v) {
      double dsum = 0.0;
      for (int e = 0; e < m; ++e) dsum += B(e, v) * B(e, v);
      if (dsum <= 0.0) continue;
      for (int e = 0; e < m; ++e) Bp(v, e) = B(e, v) / dsum;
    }
    for (int v = 0; v < n; ++v)
      for (int e = 0; e < m; ++e)
        out.x[static_cast<std::size_t>(v)] += Bp(v, e) * mass[static_cast<std::size_t>(e)];
    for (double& v : out.x) v = std::max(v, 0.0);
  }

  double total = 0.0;
  for (double v : out.x) total += v;
  if (total <= 0.0) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    out.degenerate = true;
    out.mass_retained = 0.0;
    return out;
  }
  for (double& v : out.x) v /= total;
  out.mass_retained = total;
  return out;
}

}  // namespace pathx::serial_ref
