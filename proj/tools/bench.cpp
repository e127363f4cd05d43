// Serial-versus-OpenMP timing for the per-edge and per-query kernels.
// The definitional serial references are also run on a small instance as
// a correctness spot check.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pathx/eval.hpp"
#include "pathx/features.hpp"
#include "pathx/model.hpp"
#include "pathx/reference.hpp"
#include "pathx/rng.hpp"

using namespace pathx;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

NavGraph random_graph(int n, int target_m, Rng& rng) {
  NavGraph g;
  for (int i = 0; i < n; ++i) g.add_node("article_" + std::to_string(i));
  int added = 0;
  while (added < target_m) {
    NodeId a = static_cast<NodeId>(rng.uniform(static_cast<std::uint64_t>(n)));
    NodeId b = static_cast<NodeId>(rng.uniform(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    int before = g.num_edges();
    g.add_edge(a, b);
    if (g.num_edges() > before) ++added;
  }
  return g;
}

std::vector<Query> random_queries(const NavGraph& g, int count, Rng& rng) {
  std::vector<Query> out;
  while (static_cast<int>(out.size()) < count) {
    NodeId cur = static_cast<NodeId>(rng.uniform(static_cast<std::uint64_t>(g.num_nodes())));
    std::vector<NodeId> walk = {cur};
    for (int s = 0; s < 4; ++s) {
      auto edges = g.out_edges(cur);
      std::vector<NodeId> fresh;
      for (EdgeId e : edges) {
        NodeId nxt = g.edge(e).dst;
        bool seen = false;
        for (NodeId v : walk) seen = seen || v == nxt;
        if (!seen) fresh.push_back(nxt);
      }
      if (fresh.empty()) break;
      cur = fresh[rng.uniform(fresh.size())];
      walk.push_back(cur);
    }
    if (walk.size() < 4) continue;
    Trajectory t;
    t.path_id = static_cast<PathId>(out.size());
    t.node_ids = walk;
    apply_default_split(t);
    out.push_back(make_query(t));
  }
  return out;
}

struct Row {
  std::string name;
  double serial_ms;
  double parallel_ms;
};

}  // namespace

int main() {
  Rng rng(42);
  const int n = 2000;
  NavGraph g = random_graph(n, 9000, rng);

  NodeFeatureMatrix node_f = node_degree_features(g);
  std::vector<Trajectory> trajs;
  {
    std::vector<Query> qs = random_queries(g, 400, rng);
    for (const Query& q : qs) {
      Trajectory t;
      t.path_id = q.path_id;
      t.node_ids = q.prefix;
      t.node_ids.insert(t.node_ids.end(), q.suffix.begin(), q.suffix.end());
      apply_default_split(t);
      trajs.push_back(t);
    }
  }
  EdgeFeatureMatrix edge_f = compute_edge_features(g, trajs, nullptr, FeatureConfig::Both);
  ModelContext ctx(g, node_f, edge_f, {});
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 7);
  std::vector<Query> batch = make_queries(trajs);
  batch.resize(100);

  std::vector<NodeId> sample_prefix = batch.front().prefix;
  PseudoCoordinates coords = pseudo_coordinates(g, sample_prefix, 3, 0.7);
  EdgeWeights weights = ctx.weights_for_prefix(params, sample_prefix);
  TransitionOperators ops = build_operators(weights, g, ctx.skeleton(),
                                            ProjectionMode::HeadProjection);
  AgentState x0 = one_hot_state(g.num_nodes(), sample_prefix.back());

  const int threads = max_threads();
  std::vector<Row> rows;
  auto bench = [&](const std::string& name, const std::function<void()>& fn, int reps) {
    set_threads(1);
    double serial = time_ms(fn, reps);
    set_threads(threads);
    double parallel = time_ms(fn, reps);
    rows.push_back({name, serial, parallel});
  };

  bench("similarity_hyperedge", [&] { similarity_hyperedge(g); }, 20);
  bench("dhnode_in_out_degree", [&] { dhnode_in_out_degree(g); }, 20);
  bench("edge_logits", [&] { edge_logits(params, coords, ctx.node_features(),
                                         ctx.edge_features(), g); }, 20);
  bench("propagate_h3", [&] { propagate(ops, x0, 3); }, 50);
  bench("loss_100q", [&] { loss(params, ctx, batch); }, 3);
  bench("gradient_100q", [&] { gradient(params, ctx, batch); }, 3);

  std::printf("graph: n=%d m=%d  batch=%zu  threads=%d\n", g.num_nodes(),
              g.num_edges(), batch.size(), threads);
  std::printf("%-24s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
  for (const Row& r : rows)
    std::printf("%-24s %12.3f %12.3f %8.2fx\n", r.name.c_str(), r.serial_ms,
                r.parallel_ms, r.serial_ms / r.parallel_ms);

  // definitional references on a small instance, as a spot check
  Rng small_rng(7);
  NavGraph sg = random_graph(40, 120, small_rng);
  auto fast_sim = similarity_hyperedge(sg);
  auto ref_sim = serial_ref::similarity_hyperedge(sg);
  auto fast_dh = dhnode_in_out_degree(sg);
  auto ref_dh = serial_ref::dhnode_in_out_degree(sg);
  bool ok = fast_sim == ref_sim && fast_dh == ref_dh;
  std::printf("reference spot check (n=%d m=%d): %s\n", sg.num_nodes(), sg.num_edges(),
              ok ? "match" : "MISMATCH");
  return ok ? 0 : 1;
}
