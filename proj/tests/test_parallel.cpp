#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <functional>

#include "pathx/eval.hpp"
#include "pathx/features.hpp"
#include "pathx/model.hpp"
#include "pathx/reference.hpp"
#include "test_util.hpp"

using namespace pathx;

namespace {

void with_threads(int n, const std::function<void()>& fn) {
#ifdef _OPENMP
  int before = omp_get_max_threads();
  omp_set_num_threads(n);
  fn();
  omp_set_num_threads(before);
#else
  (void)n;
  fn();
#endif
}

struct Workbench {
  NavGraph graph;
  std::vector<Trajectory> trajs;
  NodeFeatureMatrix nf;
  EdgeFeatureMatrix ef;

  explicit Workbench(std::uint64_t seed) {
    Rng rng(seed);
    graph = testutil::random_graph(60, 240, rng);
    for (int i = 0; i < 40; ++i) {
      std::vector<NodeId> walk = testutil::random_walk(graph, rng, 6);
      if (walk.size() < 4) continue;
      Trajectory t;
      t.path_id = static_cast<PathId>(trajs.size());
      t.node_ids = walk;
      apply_default_split(t);
      trajs.push_back(t);
    }
    nf = node_degree_features(graph);
    ef = compute_edge_features(graph, trajs, nullptr, FeatureConfig::Both);
  }
};

}  // namespace

TEST_CASE("feature kernels are bitwise identical across thread counts") {
  Workbench wb(111);
  std::vector<double> sim1, simN;
  std::vector<std::pair<double, double>> dh1, dhN;
  with_threads(1, [&] {
    sim1 = similarity_hyperedge(wb.graph);
    dh1 = dhnode_in_out_degree(wb.graph);
  });
  with_threads(8, [&] {
    simN = similarity_hyperedge(wb.graph);
    dhN = dhnode_in_out_degree(wb.graph);
  });
  CHECK(sim1 == simN);
  CHECK(dh1 == dhN);
  CHECK(sim1 == serial_ref::similarity_hyperedge(wb.graph));
  CHECK(dh1 == serial_ref::dhnode_in_out_degree(wb.graph));
}

TEST_CASE("edge logits match the serial reference bit for bit") {
  Workbench wb(112);
  ModelContext ctx(wb.graph, wb.nf, wb.ef, {});
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 9);
  std::vector<NodeId> prefix = wb.trajs.front().node_ids;
  prefix.resize(2);
  PseudoCoordinates coords = pseudo_coordinates(wb.graph, prefix, 3, 0.7);

  std::vector<double> z1, zN;
  with_threads(1, [&] {
    z1 = edge_logits(params, coords, ctx.node_features(), ctx.edge_features(), wb.graph);
  });
  with_threads(8, [&] {
    zN = edge_logits(params, coords, ctx.node_features(), ctx.edge_features(), wb.graph);
  });
  CHECK(z1 == zN);
  CHECK(z1 == serial_ref::edge_logits(params, coords, ctx.node_features(),
                                      ctx.edge_features(), wb.graph));
}

TEST_CASE("loss and gradient are bitwise identical across thread counts") {
  Workbench wb(113);
  ModelContext ctx(wb.graph, wb.nf, wb.ef, {});
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 21);
  std::vector<Query> batch = make_queries(wb.trajs);

  double l1 = 0, lN = 0;
  std::vector<double> g1, gN;
  with_threads(1, [&] {
    l1 = loss(params, ctx, batch);
    g1 = gradient(params, ctx, batch);
  });
  with_threads(8, [&] {
    lN = loss(params, ctx, batch);
    gN = gradient(params, ctx, batch);
  });
  CHECK(l1 == lN);
  CHECK(g1 == gN);
}

TEST_CASE("training end to end is bitwise identical across thread counts") {
  Workbench wb(114);
  ModelContext ctx(wb.graph, wb.nf, wb.ef, {});
  std::vector<Query> batch = make_queries(wb.trajs);
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 3;

  ModelParameters p1, pN;
  with_threads(1, [&] { p1 = train(ctx, batch, batch, tc).params; });
  with_threads(8, [&] { pN = train(ctx, batch, batch, tc).params; });
  CHECK(p1 == pN);
}

TEST_CASE("propagation matches across thread counts and the dense reference") {
  Workbench wb(115);
  Rng rng(5);
  EdgeWeights w = testutil::random_weights(wb.graph, rng);
  TransitionOperators ops = build_operators(w, wb.graph, ProjectionMode::HeadProjection);
  AgentState x0 = one_hot_state(wb.graph.num_nodes(), 0);

  AgentState a1, aN;
  with_threads(1, [&] { a1 = propagate(ops, x0, 3); });
  with_threads(8, [&] { aN = propagate(ops, x0, 3); });
  CHECK(a1.x == aN.x);

  AgentState ref = serial_ref::propagate_dense(w, wb.graph, x0, 3,
                                               ProjectionMode::HeadProjection);
  REQUIRE(a1.x.size() == ref.x.size());
  for (std::size_t v = 0; v < ref.x.size(); ++v)
    CHECK(a1.x[v] == doctest::Approx(ref.x[v]).epsilon(1e-12));
}
