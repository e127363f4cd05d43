#include "pathx/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>

#include "pathx/rng.hpp"
#include "pathx/text.hpp"

namespace pathx {

AgentState one_hot_state(int num_nodes, NodeId v) {
  AgentState s;
  s.x.assign(static_cast<std::size_t>(num_nodes), 0.0);
  s.x[static_cast<std::size_t>(v)] = 1.0;
  return s;
}

PseudoCoordinates pseudo_coordinates(const NavGraph& graph,
                                     std::span<const NodeId> prefix, int depth,
                                     double decay) {
  if (prefix.empty()) throw DomainError("pseudo-coordinates require a prefix");
  if (depth < 0 || decay <= 0.0 || decay > 1.0)
    throw DomainError("pseudo-coordinates require depth >= 0 and decay in (0,1]");
  const int n = graph.num_nodes();

  std::vector<double> current(static_cast<std::size_t>(n), 0.0);
  std::vector<double> history(static_cast<std::size_t>(n), 0.0);
  current[static_cast<std::size_t>(prefix.back())] = 1.0;
  const int t = static_cast<int>(prefix.size());
  for (int i = 0; i < t; ++i)
    history[static_cast<std::size_t>(prefix[static_cast<std::size_t>(i)])] +=
        std::pow(decay, t - 1 - i);

  // self-looped, out-degree-normalized forward diffusion
  std::vector<double> factor(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v)
    factor[static_cast<std::size_t>(v)] = 1.0 / (1.0 + graph.out_degree(v));
  std::vector<double> next(static_cast<std::size_t>(n));
  auto diffuse = [&](std::vector<double>& vec) {
    for (int k = 0; k < depth; ++k) {
      std::fill(next.begin(), next.end(), 0.0);
      for (NodeId v = 0; v < n; ++v) {
        double share = vec[static_cast<std::size_t>(v)] * factor[static_cast<std::size_t>(v)];
        if (share == 0.0) continue;
        next[static_cast<std::size_t>(v)] += share;
        for (EdgeId e : graph.out_edges(v))
          next[static_cast<std::size_t>(graph.edge(e).dst)] += share;
      }
      vec.swap(next);
    }
  };
  diffuse(current);
  diffuse(history);

  PseudoCoordinates out;
  out.depth = depth;
  out.decay = decay;
  out.values = Matrix(n, 2);
  for (NodeId v = 0; v < n; ++v) {
    out.values(v, 0) = current[static_cast<std::size_t>(v)];
    out.values(v, 1) = history[static_cast<std::size_t>(v)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

struct MlpLayout {
  std::vector<int> widths;  // input, hidden..., 1
  std::vector<int> w_off;
  std::vector<int> b_off;
  int act_size = 0;
  int num_params = 0;

  explicit MlpLayout(const MlpShape& shape) {
    widths.push_back(shape.input_width);
    for (int h : shape.hidden) widths.push_back(h);
    widths.push_back(1);
    int off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      w_off.push_back(off);
      off += widths[l] * widths[l + 1];
      b_off.push_back(off);
      off += widths[l + 1];
      act_size += widths[l + 1];
    }
    num_params = off;
  }

  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
};

double mlp_forward(const MlpLayout& ly, const double* params, const double* input,
                   double* acts) {
  const double* in = input;
  double* out = acts;
  for (int l = 0; l < ly.num_layers(); ++l) {
    const int in_w = ly.widths[static_cast<std::size_t>(l)];
    const int out_w = ly.widths[static_cast<std::size_t>(l) + 1];
    const double* W = params + ly.w_off[static_cast<std::size_t>(l)];
    const double* b = params + ly.b_off[static_cast<std::size_t>(l)];
    const bool hidden = l + 1 < ly.num_layers();
    for (int o = 0; o < out_w; ++o) {
      double s = b[o];
      const double* row = W + static_cast<std::ptrdiff_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) s += row[i] * in[i];
      out[o] = hidden ? std::tanh(s) : s;
    }
    in = out;
    out += out_w;
  }
  return acts[ly.act_size - 1];
}

void mlp_backward(const MlpLayout& ly, const double* params, const double* input,
                  const double* acts, double dz, double* grad,
                  std::vector<double>& dpre, std::vector<double>& dtmp) {
  dpre.assign(1, dz);
  // activation segment offsets
  for (int l = ly.num_layers() - 1; l >= 0; --l) {
    const int in_w = ly.widths[static_cast<std::size_t>(l)];
    const int out_w = ly.widths[static_cast<std::size_t>(l) + 1];
    int seg = 0;
    for (int k = 0; k < l; ++k) seg += ly.widths[static_cast<std::size_t>(k) + 1];
    const double* in = l == 0 ? input : acts + seg - ly.widths[static_cast<std::size_t>(l)];
    const double* W = params + ly.w_off[static_cast<std::size_t>(l)];
    double* gW = grad + ly.w_off[static_cast<std::size_t>(l)];
    double* gb = grad + ly.b_off[static_cast<std::size_t>(l)];
    for (int o = 0; o < out_w; ++o) {
      const double d = dpre[static_cast<std::size_t>(o)];
      gb[o] += d;
      double* grow = gW + static_cast<std::ptrdiff_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) grow[i] += d * in[i];
    }
    if (l > 0) {
      dtmp.assign(static_cast<std::size_t>(in_w), 0.0);
      for (int o = 0; o < out_w; ++o) {
        const double d = dpre[static_cast<std::size_t>(o)];
        const double* row = W + static_cast<std::ptrdiff_t>(o) * in_w;
        for (int i = 0; i < in_w; ++i) dtmp[static_cast<std::size_t>(i)] += d * row[i];
      }
      const double* a_prev = in;  // tanh outputs of layer l-1
      for (int i = 0; i < in_w; ++i)
        dtmp[static_cast<std::size_t>(i)] *= 1.0 - a_prev[i] * a_prev[i];
      dpre.swap(dtmp);
    }
  }
}

}  // namespace

int MlpShape::num_params() const { return MlpLayout(*this).num_params; }

ModelParameters::ModelParameters(MlpShape shape, std::vector<double> flat)
    : shape_(std::move(shape)), flat_(std::move(flat)) {
  if (static_cast<int>(flat_.size()) != shape_.num_params())
    throw DimensionError("parameter vector does not match MLP shape");
}

ModelParameters ModelParameters::seeded(const MlpShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> flat(static_cast<std::size_t>(shape.num_params()));
  for (double& v : flat) v = rng.uniform_real(-0.1, 0.1);
  return ModelParameters(shape, std::move(flat));
}

int edge_input_width(int node_feature_width, int edge_feature_width) {
  return 4 + 2 * node_feature_width + edge_feature_width;
}

namespace {

void assemble_edge_input(const NavGraph& graph, const PseudoCoordinates& coords,
                         const Matrix& F, const Matrix& E, EdgeId e, double* out) {
  const DirectedEdge& edge = graph.edge(e);
  int k = 0;
  out[k++] = coords.values(edge.src, 0);
  out[k++] = coords.values(edge.src, 1);
  out[k++] = coords.values(edge.dst, 0);
  out[k++] = coords.values(edge.dst, 1);
  for (int c = 0; c < F.cols(); ++c) out[k++] = F(edge.src, c);
  for (int c = 0; c < F.cols(); ++c) out[k++] = F(edge.dst, c);
  for (int c = 0; c < E.cols(); ++c) out[k++] = E(e, c);
}

}  // namespace

std::vector<double> edge_logits(const ModelParameters& params,
                                const PseudoCoordinates& coords,
                                const Matrix& node_features,
                                const Matrix& edge_features,
                                const NavGraph& graph) {
  const int in_w = edge_input_width(node_features.cols(), edge_features.cols());
  if (params.shape().input_width != in_w)
    throw DimensionError("edge-logit input width " + std::to_string(in_w) +
                         " does not match parameter shape " +
                         std::to_string(params.shape().input_width));
  const MlpLayout ly(params.shape());
  const int m = graph.num_edges();
  std::vector<double> logits(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel
  {
    std::vector<double> input(static_cast<std::size_t>(in_w));
    std::vector<double> acts(static_cast<std::size_t>(ly.act_size));
#pragma omp for schedule(static)
    for (int e = 0; e < m; ++e) {
      assemble_edge_input(graph, coords, node_features, edge_features, e, input.data());
      logits[static_cast<std::size_t>(e)] =
          mlp_forward(ly, params.flat().data(), input.data(), acts.data());
    }
  }
  for (double z : logits)
    if (!std::isfinite(z)) throw Error("non-finite value at stage: edge logits");
  return logits;
}

EdgeWeights normalize_weights(std::vector<double> logits, const NavGraph& graph) {
  if (static_cast<int>(logits.size()) != graph.num_edges())
    throw DimensionError("logit count does not match edge count");
  EdgeWeights out;
  out.weights.assign(logits.size(), 0.0);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    auto edges = graph.out_edges(v);
    if (edges.empty()) continue;
    double zmax = -std::numeric_limits<double>::infinity();
    for (EdgeId e : edges) zmax = std::max(zmax, logits[static_cast<std::size_t>(e)]);
    double sum = 0.0;
    for (EdgeId e : edges)
      sum += std::exp(logits[static_cast<std::size_t>(e)] - zmax);
    for (EdgeId e : edges)
      out.weights[static_cast<std::size_t>(e)] =
          std::exp(logits[static_cast<std::size_t>(e)] - zmax) / sum;
  }
  out.logits = std::move(logits);
  return out;
}

OperatorSkeleton OperatorSkeleton::build(const NavGraph& graph) {
  const int m = graph.num_edges();
  OperatorSkeleton sk;
  sk.backtrack.resize(static_cast<std::size_t>(m));
  sk.succ_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  for (EdgeId f = 0; f < m; ++f) {
    const DirectedEdge& ef = graph.edge(f);
    sk.backtrack[static_cast<std::size_t>(f)] = graph.find_edge(ef.dst, ef.src);
    for (EdgeId g : graph.out_edges(ef.dst))
      if (graph.edge(g).dst != ef.src) sk.succ_ptr[static_cast<std::size_t>(f) + 1]++;
  }
  for (int f = 0; f < m; ++f) sk.succ_ptr[static_cast<std::size_t>(f) + 1] += sk.succ_ptr[static_cast<std::size_t>(f)];
  sk.succ_edge.resize(static_cast<std::size_t>(sk.succ_ptr[static_cast<std::size_t>(m)]));
  {
    std::vector<int> cursor(sk.succ_ptr.begin(), sk.succ_ptr.end() - 1);
    for (EdgeId f = 0; f < m; ++f) {
      const DirectedEdge& ef = graph.edge(f);
      for (EdgeId g : graph.out_edges(ef.dst))
        if (graph.edge(g).dst != ef.src)
          sk.succ_edge[static_cast<std::size_t>(cursor[static_cast<std::size_t>(f)]++)] = g;
    }
  }
  // transitions regrouped by target edge for gather-style application
  sk.pred_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  for (EdgeId g : sk.succ_edge) sk.pred_ptr[static_cast<std::size_t>(g) + 1]++;
  for (int g = 0; g < m; ++g) sk.pred_ptr[static_cast<std::size_t>(g) + 1] += sk.pred_ptr[static_cast<std::size_t>(g)];
  sk.pred_trans.resize(sk.succ_edge.size());
  sk.pred_from.resize(sk.succ_edge.size());
  {
    std::vector<int> cursor(sk.pred_ptr.begin(), sk.pred_ptr.end() - 1);
    for (EdgeId f = 0; f < m; ++f) {
      for (int k = sk.succ_ptr[static_cast<std::size_t>(f)];
           k < sk.succ_ptr[static_cast<std::size_t>(f) + 1]; ++k) {
        EdgeId g = sk.succ_edge[static_cast<std::size_t>(k)];
        int pos = cursor[static_cast<std::size_t>(g)]++;
        sk.pred_trans[static_cast<std::size_t>(pos)] = k;
        sk.pred_from[static_cast<std::size_t>(pos)] = f;
      }
    }
  }
  return sk;
}

namespace {

/// Fills transition probabilities for a given weight vector. den[f] is the
/// Eq-style denominator (1 - w(backtrack)) or 1 when no reverse edge
/// exists; a row without usable successors is trapped and stays zero.
void fill_transition_probs(const OperatorSkeleton& sk,
                           const std::vector<double>& w, std::vector<double>& den,
                           std::vector<double>& prob, std::vector<char>& trapped) {
  const int m = static_cast<int>(sk.backtrack.size());
  den.assign(static_cast<std::size_t>(m), 1.0);
  prob.assign(sk.succ_edge.size(), 0.0);
  trapped.assign(static_cast<std::size_t>(m), 0);
  for (EdgeId f = 0; f < m; ++f) {
    const int begin = sk.succ_ptr[static_cast<std::size_t>(f)];
    const int end = sk.succ_ptr[static_cast<std::size_t>(f) + 1];
    EdgeId bt = sk.backtrack[static_cast<std::size_t>(f)];
    double d = bt == kNoEdge ? 1.0 : 1.0 - w[static_cast<std::size_t>(bt)];
    den[static_cast<std::size_t>(f)] = d;
    if (begin == end || d <= 0.0) {
      trapped[static_cast<std::size_t>(f)] = 1;
      continue;
    }
    for (int k = begin; k < end; ++k)
      prob[static_cast<std::size_t>(k)] =
          w[static_cast<std::size_t>(sk.succ_edge[static_cast<std::size_t>(k)])] / d;
  }
}

void advance_mass(const OperatorSkeleton& sk, const std::vector<double>& prob,
                  const std::vector<double>& cur, std::vector<double>& next) {
  const int m = static_cast<int>(cur.size());
  next.assign(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(static) if (m > 2048)
  for (int g = 0; g < m; ++g) {
    double acc = 0.0;
    for (int k = sk.pred_ptr[static_cast<std::size_t>(g)];
         k < sk.pred_ptr[static_cast<std::size_t>(g) + 1]; ++k) {
      acc += prob[static_cast<std::size_t>(sk.pred_trans[static_cast<std::size_t>(k)])] *
             cur[static_cast<std::size_t>(sk.pred_from[static_cast<std::size_t>(k)])];
    }
    next[static_cast<std::size_t>(g)] = acc;
  }
}

}  // namespace

TransitionOperators build_operators(const EdgeWeights& weights,
                                    const NavGraph& graph,
                                    const OperatorSkeleton& skeleton,
                                    ProjectionMode mode) {
  if (static_cast<int>(weights.weights.size()) != graph.num_edges())
    throw DimensionError("weight count does not match edge count");
  TransitionOperators ops;
  ops.graph = &graph;
  ops.mode = mode;
  ops.weight = weights.weights;
  ops.skeleton = std::shared_ptr<const OperatorSkeleton>(
      std::shared_ptr<const OperatorSkeleton>(), &skeleton);
  std::vector<double> den;
  std::vector<char> trapped;
  fill_transition_probs(skeleton, ops.weight, den, ops.prob, trapped);
  ops.trapped.assign(trapped.begin(), trapped.end());
  return ops;
}

TransitionOperators build_operators(const EdgeWeights& weights,
                                    const NavGraph& graph, ProjectionMode mode) {
  auto owned = std::make_shared<OperatorSkeleton>(OperatorSkeleton::build(graph));
  TransitionOperators ops = build_operators(weights, graph, *owned, mode);
  ops.skeleton = std::move(owned);
  return ops;
}

Matrix dense_transition_matrix(const TransitionOperators& ops) {
  const int m = ops.graph->num_edges();
  Matrix P(m, m);
  const OperatorSkeleton& sk = *ops.skeleton;
  for (EdgeId f = 0; f < m; ++f)
    for (int k = sk.succ_ptr[static_cast<std::size_t>(f)];
         k < sk.succ_ptr[static_cast<std::size_t>(f) + 1]; ++k)
      P(f, sk.succ_edge[static_cast<std::size_t>(k)]) = ops.prob[static_cast<std::size_t>(k)];
  return P;
}

AgentState propagate(const TransitionOperators& ops, const AgentState& x_t, int h) {
  const NavGraph& graph = *ops.graph;
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  if (static_cast<int>(x_t.x.size()) != n)
    throw DimensionError("agent state length does not match node count");
  if (h < 1) throw DomainError("propagation horizon must be >= 1");
  if (ops.mode == ProjectionMode::Pseudoinverse && m > 5000)
    throw DomainError("pseudoinverse mode is restricted to m <= 5000");

  std::vector<double> mass(static_cast<std::size_t>(m), 0.0);
  for (EdgeId e = 0; e < m; ++e)
    mass[static_cast<std::size_t>(e)] =
        ops.weight[static_cast<std::size_t>(e)] *
        x_t.x[static_cast<std::size_t>(graph.edge(e).src)];

  const int steps = ops.mode == ProjectionMode::HeadProjection ? h - 1 : h;
  std::vector<double> next;
  for (int s = 0; s < steps; ++s) {
    advance_mass(*ops.skeleton, ops.prob, mass, next);
    mass.swap(next);
  }

  AgentState out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  if (ops.mode == ProjectionMode::HeadProjection) {
    for (EdgeId e = 0; e < m; ++e)
      out.x[static_cast<std::size_t>(graph.edge(e).dst)] += mass[static_cast<std::size_t>(e)];
  } else {
    // closed-form Moore-Penrose pseudoinverse of the lift: its columns
    // have disjoint support, so B+ = diag(1/sum w^2) B^T
    for (NodeId v = 0; v < n; ++v) {
      double dsum = 0.0, s = 0.0;
      for (EdgeId e : graph.out_edges(v)) {
        double w = ops.weight[static_cast<std::size_t>(e)];
        dsum += w * w;
        s += w * mass[static_cast<std::size_t>(e)];
      }
      out.x[static_cast<std::size_t>(v)] = dsum > 0.0 ? s / dsum : 0.0;
    }
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

double suffix_likelihood(const EdgeWeights& weights, const NavGraph& graph,
                         std::span<const NodeId> prefix,
                         std::span<const NodeId> suffix, std::string* diag) {
  if (prefix.empty() || suffix.empty())
    throw DomainError("suffix likelihood requires nonempty prefix and suffix");
  EdgeId prev = kNoEdge;
  if (prefix.size() >= 2)
    prev = graph.find_edge(prefix[prefix.size() - 2], prefix[prefix.size() - 1]);

  double prob = 1.0;
  NodeId cur = prefix.back();
  for (NodeId nxt : suffix) {
    EdgeId e = graph.find_edge(cur, nxt);
    if (e == kNoEdge) {
      if (diag)
        *diag = "suffix step " + std::to_string(cur) + "->" + std::to_string(nxt) +
                " is not a graph edge";
      return 0.0;
    }
    double step;
    if (prev == kNoEdge) {
      step = weights.weights[static_cast<std::size_t>(e)];
    } else if (nxt == graph.edge(prev).src) {
      step = 0.0;  // immediate backtrack is forbidden
    } else {
      EdgeId bt = graph.find_edge(graph.edge(e).src, graph.edge(prev).src);
      double den = bt == kNoEdge ? 1.0 : 1.0 - weights.weights[static_cast<std::size_t>(bt)];
      step = den > 0.0 ? weights.weights[static_cast<std::size_t>(e)] / den : 0.0;
    }
    prob *= step;
    prev = e;
    cur = nxt;
  }
  return prob;
}

Query make_query(const Trajectory& t) {
  if (t.prefix_len < 1 || t.horizon < 1 || t.prefix_len + t.horizon != t.length())
    throw DomainError("trajectory " + std::to_string(t.path_id) +
                      " has no valid prefix/suffix split");
  Query q;
  q.path_id = t.path_id;
  q.prefix.assign(t.node_ids.begin(), t.node_ids.begin() + t.prefix_len);
  q.suffix.assign(t.node_ids.begin() + t.prefix_len, t.node_ids.end());
  return q;
}

std::vector<Query> make_queries(const std::vector<Trajectory>& trajectories) {
  std::vector<Query> out;
  out.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) out.push_back(make_query(t));
  return out;
}

// ---------------------------------------------------------------------------
// ModelContext

ModelContext::ModelContext(const NavGraph& graph,
                           const NodeFeatureMatrix& node_features,
                           const EdgeFeatureMatrix& edge_features,
                           ModelConfig config)
    : graph_(&graph),
      config_(std::move(config)),
      node_std_(node_features.values),
      edge_std_(edge_features.values),
      node_schema_(node_features.schema),
      edge_schema_(edge_features.schema),
      skeleton_(OperatorSkeleton::build(graph)) {
  if (node_std_.rows() != graph.num_nodes())
    throw DimensionError("node feature rows do not match node count");
  if (edge_std_.rows() != graph.num_edges())
    throw DimensionError("edge feature rows do not match edge count");
  standardize_columns(node_std_);
  standardize_columns(edge_std_);
}

MlpShape ModelContext::mlp_shape() const {
  return {edge_input_width(node_std_.cols(), edge_std_.cols()), config_.hidden};
}

CheckpointSchema ModelContext::schema() const {
  return {node_schema_, edge_schema_, config_.coord_depth, config_.coord_decay,
          config_.hidden};
}

EdgeWeights ModelContext::weights_for_prefix(const ModelParameters& params,
                                             std::span<const NodeId> prefix) const {
  PseudoCoordinates coords =
      pseudo_coordinates(*graph_, prefix, config_.coord_depth, config_.coord_decay);
  return normalize_weights(edge_logits(params, coords, node_std_, edge_std_, *graph_),
                           *graph_);
}

AgentState ModelContext::predict(const ModelParameters& params, const Query& q) const {
  EdgeWeights w = weights_for_prefix(params, q.prefix);
  TransitionOperators ops = build_operators(w, *graph_, skeleton_, config_.mode);
  return propagate(ops, one_hot_state(graph_->num_nodes(), q.prefix.back()),
                   q.horizon());
}

// ---------------------------------------------------------------------------
// Loss and gradient

namespace {

struct QueryWork {
  std::vector<double> inputs;  // m * in_w (kept only for backward)
  std::vector<double> acts;    // m * act_size
  std::vector<double> logits;
  EdgeWeights ew;
  std::vector<double> den;
  std::vector<double> prob;
  std::vector<char> trapped;
  std::vector<std::vector<double>> mass;  // steps + 1 vectors
  std::vector<double> xhat_raw;
  double total = 0.0;
  bool degenerate = false;
};

double forward_query(const ModelParameters& params, const ModelContext& ctx,
                     const Query& q, bool keep, QueryWork& wk) {
  const NavGraph& graph = ctx.graph();
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  const MlpLayout ly(params.shape());
  const int in_w = ly.widths[0];

  PseudoCoordinates coords = pseudo_coordinates(
      graph, q.prefix, ctx.config().coord_depth, ctx.config().coord_decay);

  wk.logits.assign(static_cast<std::size_t>(m), 0.0);
  if (keep) {
    wk.inputs.assign(static_cast<std::size_t>(m) * in_w, 0.0);
    wk.acts.assign(static_cast<std::size_t>(m) * ly.act_size, 0.0);
  }
  std::vector<double> tmp_in(static_cast<std::size_t>(in_w));
  std::vector<double> tmp_acts(static_cast<std::size_t>(ly.act_size));
  for (EdgeId e = 0; e < m; ++e) {
    double* in = keep ? wk.inputs.data() + static_cast<std::ptrdiff_t>(e) * in_w
                      : tmp_in.data();
    double* acts = keep ? wk.acts.data() + static_cast<std::ptrdiff_t>(e) * ly.act_size
                        : tmp_acts.data();
    assemble_edge_input(graph, coords, ctx.node_features(), ctx.edge_features(), e, in);
    wk.logits[static_cast<std::size_t>(e)] =
        mlp_forward(ly, params.flat().data(), in, acts);
    if (!std::isfinite(wk.logits[static_cast<std::size_t>(e)]))
      throw Error("non-finite value at stage: edge logits");
  }

  wk.ew = normalize_weights(wk.logits, graph);
  fill_transition_probs(ctx.skeleton(), wk.ew.weights, wk.den, wk.prob, wk.trapped);

  const int h = q.horizon();
  const int steps = ctx.config().mode == ProjectionMode::HeadProjection ? h - 1 : h;
  wk.mass.assign(static_cast<std::size_t>(steps) + 1,
                 std::vector<double>(static_cast<std::size_t>(m), 0.0));
  NodeId cur = q.prefix.back();
  for (EdgeId e : graph.out_edges(cur))
    wk.mass[0][static_cast<std::size_t>(e)] = wk.ew.weights[static_cast<std::size_t>(e)];
  for (int s = 0; s < steps; ++s)
    advance_mass(ctx.skeleton(), wk.prob, wk.mass[static_cast<std::size_t>(s)],
                 wk.mass[static_cast<std::size_t>(s) + 1]);

  const std::vector<double>& last = wk.mass.back();
  wk.xhat_raw.assign(static_cast<std::size_t>(n), 0.0);
  if (ctx.config().mode == ProjectionMode::HeadProjection) {
    for (EdgeId e = 0; e < m; ++e)
      wk.xhat_raw[static_cast<std::size_t>(graph.edge(e).dst)] +=
          last[static_cast<std::size_t>(e)];
  } else {
    for (NodeId v = 0; v < n; ++v) {
      double dsum = 0.0, s = 0.0;
      for (EdgeId e : graph.out_edges(v)) {
        double w = wk.ew.weights[static_cast<std::size_t>(e)];
        dsum += w * w;
        s += w * last[static_cast<std::size_t>(e)];
      }
      wk.xhat_raw[static_cast<std::size_t>(v)] = dsum > 0.0 ? s / dsum : 0.0;
    }
  }

  wk.total = 0.0;
  for (double v : wk.xhat_raw) wk.total += v;
  wk.degenerate = wk.total <= 0.0;
  double q_loss;
  if (wk.degenerate) {
    q_loss = -std::log(kLikelihoodEpsilon);
  } else {
    double r = wk.xhat_raw[static_cast<std::size_t>(q.target())];
    q_loss = -std::log(r / wk.total + kLikelihoodEpsilon);
  }
  if (!std::isfinite(q_loss)) throw Error("non-finite value at stage: loss");
  return q_loss;
}

void backward_query(const ModelParameters& params, const ModelContext& ctx,
                    const Query& q, const QueryWork& wk, double scale,
                    double* grad) {
  if (wk.degenerate) return;  // constant -ln(eps) contribution
  const NavGraph& graph = ctx.graph();
  const OperatorSkeleton& sk = ctx.skeleton();
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  const MlpLayout ly(params.shape());
  const int in_w = ly.widths[0];

  const double r = wk.xhat_raw[static_cast<std::size_t>(q.target())];
  const double T = wk.total;
  const double qv = r / T;
  const double dq = -scale / (qv + kLikelihoodEpsilon);

  std::vector<double> dxhat(static_cast<std::size_t>(n), dq * (-r / (T * T)));
  dxhat[static_cast<std::size_t>(q.target())] += dq / T;

  const std::vector<double>& last = wk.mass.back();
  std::vector<double> dmass(static_cast<std::size_t>(m), 0.0);
  std::vector<double> dw(static_cast<std::size_t>(m), 0.0);
  if (ctx.config().mode == ProjectionMode::HeadProjection) {
    for (EdgeId e = 0; e < m; ++e)
      dmass[static_cast<std::size_t>(e)] =
          dxhat[static_cast<std::size_t>(graph.edge(e).dst)];
  } else {
    for (NodeId v = 0; v < n; ++v) {
      double dsum = 0.0;
      for (EdgeId e : graph.out_edges(v)) {
        double w = wk.ew.weights[static_cast<std::size_t>(e)];
        dsum += w * w;
      }
      if (dsum <= 0.0) continue;
      const double dx = dxhat[static_cast<std::size_t>(v)];
      const double xv = wk.xhat_raw[static_cast<std::size_t>(v)];
      for (EdgeId e : graph.out_edges(v)) {
        double w = wk.ew.weights[static_cast<std::size_t>(e)];
        dmass[static_cast<std::size_t>(e)] += dx * w / dsum;
        dw[static_cast<std::size_t>(e)] +=
            dx * (last[static_cast<std::size_t>(e)] - 2.0 * w * xv) / dsum;
      }
    }
  }

  // back through the transition steps; transition probs are constant per
  // query, so their adjoints accumulate across steps
  const int steps = static_cast<int>(wk.mass.size()) - 1;
  std::vector<double> dprob(wk.prob.size(), 0.0);
  std::vector<double> dprev(static_cast<std::size_t>(m));
  for (int s = steps; s >= 1; --s) {
    const std::vector<double>& mprev = wk.mass[static_cast<std::size_t>(s) - 1];
    std::fill(dprev.begin(), dprev.end(), 0.0);
    for (EdgeId f = 0; f < m; ++f) {
      double acc = 0.0;
      for (int k = sk.succ_ptr[static_cast<std::size_t>(f)];
           k < sk.succ_ptr[static_cast<std::size_t>(f) + 1]; ++k) {
        EdgeId g = sk.succ_edge[static_cast<std::size_t>(k)];
        const double dg = dmass[static_cast<std::size_t>(g)];
        dprob[static_cast<std::size_t>(k)] += mprev[static_cast<std::size_t>(f)] * dg;
        acc += wk.prob[static_cast<std::size_t>(k)] * dg;
      }
      dprev[static_cast<std::size_t>(f)] = acc;
    }
    dmass.swap(dprev);
  }

  // lift: mass0[e] = w[e] for out-edges of the prefix end
  for (EdgeId e : graph.out_edges(q.prefix.back()))
    dw[static_cast<std::size_t>(e)] += dmass[static_cast<std::size_t>(e)];

  // transitions: p = w(target) / den(from); den = 1 - w(backtrack)
  for (EdgeId f = 0; f < m; ++f) {
    if (wk.trapped[static_cast<std::size_t>(f)]) continue;
    const double den = wk.den[static_cast<std::size_t>(f)];
    const EdgeId bt = sk.backtrack[static_cast<std::size_t>(f)];
    for (int k = sk.succ_ptr[static_cast<std::size_t>(f)];
         k < sk.succ_ptr[static_cast<std::size_t>(f) + 1]; ++k) {
      const double dp = dprob[static_cast<std::size_t>(k)];
      if (dp == 0.0) continue;
      EdgeId g = sk.succ_edge[static_cast<std::size_t>(k)];
      dw[static_cast<std::size_t>(g)] += dp / den;
      if (bt != kNoEdge)
        dw[static_cast<std::size_t>(bt)] +=
            dp * wk.ew.weights[static_cast<std::size_t>(g)] / (den * den);
    }
  }

  // softmax per source node
  std::vector<double> dz(static_cast<std::size_t>(m), 0.0);
  for (NodeId v = 0; v < n; ++v) {
    auto edges = graph.out_edges(v);
    if (edges.empty()) continue;
    double inner = 0.0;
    for (EdgeId e : edges)
      inner += dw[static_cast<std::size_t>(e)] * wk.ew.weights[static_cast<std::size_t>(e)];
    for (EdgeId e : edges)
      dz[static_cast<std::size_t>(e)] =
          wk.ew.weights[static_cast<std::size_t>(e)] *
          (dw[static_cast<std::size_t>(e)] - inner);
  }

  std::vector<double> dpre, dtmp;
  for (EdgeId e = 0; e < m; ++e) {
    if (dz[static_cast<std::size_t>(e)] == 0.0) continue;
    mlp_backward(ly, params.flat().data(),
                 wk.inputs.data() + static_cast<std::ptrdiff_t>(e) * in_w,
                 wk.acts.data() + static_cast<std::ptrdiff_t>(e) * ly.act_size,
                 dz[static_cast<std::size_t>(e)], grad, dpre, dtmp);
  }
}

}  // namespace

double loss(const ModelParameters& params, const ModelContext& ctx,
            const std::vector<Query>& batch) {
  if (batch.empty()) throw DomainError("loss over an empty batch");
  const int b = static_cast<int>(batch.size());
  std::vector<double> per_query(batch.size(), 0.0);
  std::exception_ptr failure = nullptr;
#pragma omp parallel
  {
    QueryWork wk;
#pragma omp for schedule(static)
    for (int i = 0; i < b; ++i) {
      try {
        per_query[static_cast<std::size_t>(i)] =
            forward_query(params, ctx, batch[static_cast<std::size_t>(i)], false, wk);
      } catch (...) {
#pragma omp critical(pathx_loss_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  double sum = 0.0;
  for (double v : per_query) sum += v;
  return sum / b;
}

std::vector<double> gradient(const ModelParameters& params, const ModelContext& ctx,
                             const std::vector<Query>& batch) {
  if (batch.empty()) throw DomainError("gradient over an empty batch");
  const int b = static_cast<int>(batch.size());
  const int p = params.shape().num_params();
  const double scale = 1.0 / b;
  std::vector<std::vector<double>> per_query(
      batch.size(), std::vector<double>(static_cast<std::size_t>(p), 0.0));
  std::exception_ptr failure = nullptr;
#pragma omp parallel
  {
    QueryWork wk;
#pragma omp for schedule(static)
    for (int i = 0; i < b; ++i) {
      try {
        forward_query(params, ctx, batch[static_cast<std::size_t>(i)], true, wk);
        backward_query(params, ctx, batch[static_cast<std::size_t>(i)], wk, scale,
                       per_query[static_cast<std::size_t>(i)].data());
      } catch (...) {
#pragma omp critical(pathx_grad_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  // fixed-order accumulation keeps the result identical for any thread count
  std::vector<double> grad(static_cast<std::size_t>(p), 0.0);
  for (const auto& g : per_query)
    for (int j = 0; j < p; ++j) grad[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(j)];
  for (double v : grad)
    if (!std::isfinite(v)) throw Error("non-finite value at stage: gradient");
  return grad;
}

TrainResult train(const ModelContext& ctx, const std::vector<Query>& train_set,
                  const std::vector<Query>& validation_set,
                  const TrainConfig& config) {
  if (train_set.empty()) throw DomainError("training requires a nonempty train set");
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), config.seed);

  TrainResult result;
  result.params = params;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    double train_l = loss(params, ctx, train_set);
    double val_l = validation_set.empty() ? train_l : loss(params, ctx, validation_set);
    if (train_l > config.divergence_threshold)
      throw Error("training diverged at epoch " + std::to_string(epoch) +
                  " (loss " + std::to_string(train_l) + ")");
    result.train_loss.push_back(train_l);
    result.val_loss.push_back(val_l);
    if (val_l < best_val) {
      best_val = val_l;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (epoch == config.epochs) break;
    if (epoch - result.best_epoch > config.patience) break;  // early stop

    std::vector<double> g = gradient(params, ctx, train_set);
    for (std::size_t j = 0; j < g.size(); ++j)
      params.flat()[j] -= config.learning_rate * g[j];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
std::string join_ints(const std::vector<int>& v) {
  std::vector<std::string> parts;
  for (int x : v) parts.push_back(std::to_string(x));
  return join(parts, ',');
}
}  // namespace

void save_checkpoint(const std::filesystem::path& file,
                     const ModelParameters& params, const CheckpointSchema& schema) {
  std::string out = "pathx-checkpoint 1\n";
  out += "node_schema " + join(schema.node_schema, ',') + "\n";
  out += "edge_schema " + join(schema.edge_schema, ',') + "\n";
  out += "coord_depth " + std::to_string(schema.coord_depth) + "\n";
  out += "coord_decay " + format_double_hex(schema.coord_decay) + "\n";
  out += "hidden " + join_ints(schema.hidden) + "\n";
  out += "input_width " + std::to_string(params.shape().input_width) + "\n";
  out += "num_params " + std::to_string(params.flat().size()) + "\n";
  for (double v : params.flat()) out += format_double_hex(v) + "\n";
  write_file(file, out);
}

std::pair<ModelParameters, CheckpointSchema> load_checkpoint(
    const std::filesystem::path& file) {
  std::vector<std::string> lines = read_lines(file);
  if (lines.empty() || lines[0] != "pathx-checkpoint 1")
    throw ParseError("not a recognized checkpoint file: " + file.string());
  CheckpointSchema schema;
  int input_width = 0;
  std::size_t num_params = 0;
  std::size_t i = 1;
  auto field = [&](const std::string& line, const char* key) -> std::string {
    std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0 && line != key)
      throw ParseError("checkpoint: expected '" + std::string(key) + "' line");
    return line.size() > prefix.size() ? line.substr(prefix.size()) : std::string();
  };
  auto parse_list = [](const std::string& s) {
    std::vector<std::string> out;
    if (!s.empty()) out = split(s, ',');
    return out;
  };
  schema.node_schema = parse_list(field(lines.at(i++), "node_schema"));
  schema.edge_schema = parse_list(field(lines.at(i++), "edge_schema"));
  schema.coord_depth =
      static_cast<int>(parse_int(field(lines.at(i++), "coord_depth"), "coord_depth"));
  schema.coord_decay = parse_double_hex(field(lines.at(i++), "coord_decay"));
  schema.hidden.clear();
  for (const std::string& p : parse_list(field(lines.at(i++), "hidden")))
    schema.hidden.push_back(static_cast<int>(parse_int(p, "hidden width")));
  input_width =
      static_cast<int>(parse_int(field(lines.at(i++), "input_width"), "input_width"));
  num_params = static_cast<std::size_t>(
      parse_int(field(lines.at(i++), "num_params"), "num_params"));
  std::vector<double> flat;
  flat.reserve(num_params);
  for (std::size_t k = 0; k < num_params; ++k)
    flat.push_back(parse_double_hex(lines.at(i + k)));
  MlpShape shape{input_width, schema.hidden};
  return {ModelParameters(shape, std::move(flat)), schema};
}

void ensure_schema_match(const CheckpointSchema& checkpoint,
                         const CheckpointSchema& context) {
  if (checkpoint.node_schema != context.node_schema)
    throw DimensionError("checkpoint node feature schema does not match dataset");
  if (checkpoint.edge_schema != context.edge_schema)
    throw DimensionError("checkpoint edge feature schema does not match dataset");
  if (checkpoint.coord_depth != context.coord_depth ||
      checkpoint.coord_decay != context.coord_decay)
    throw DimensionError("checkpoint coordinate configuration does not match");
  if (checkpoint.hidden != context.hidden)
    throw DimensionError("checkpoint hidden layer widths do not match");
}

}  // namespace pathx
