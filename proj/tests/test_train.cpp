#include <doctest.h>

#include "pathx/eval.hpp"
#include "pathx/model.hpp"
#include "test_util.hpp"

using namespace pathx;

namespace {

/// Hand-built toy: a single observed route through a graph that also has
/// untaken branch edges, so the initial loss is positive and learnable.
struct RouteToy {
  NavGraph graph;
  std::vector<Trajectory> paths;

  RouteToy() {
    graph = build_graph({{"A", "B"},
                         {"B", "C"},
                         {"C", "D"},
                         {"D", "E"},
                         {"A", "X1"},
                         {"B", "X2"},
                         {"C", "X3"},
                         {"X1", "Y"},
                         {"X2", "Y"},
                         {"X3", "Y"}},
                        {"A", "B", "C", "D", "E", "X1", "X2", "X3", "Y"});
    for (int i = 0; i < 20; ++i) {
      Trajectory t;
      t.path_id = i;
      t.node_ids = {0, 1, 2, 3, 4};  // A,B,C,D,E
      apply_default_split(t);
      paths.push_back(t);
    }
  }
};

ModelContext toy_context(const RouteToy& toy) {
  NodeFeatureMatrix nf = node_degree_features(toy.graph);
  EdgeFeatureMatrix ef =
      compute_edge_features(toy.graph, toy.paths, nullptr, FeatureConfig::Both);
  return ModelContext(toy.graph, nf, ef, {});
}

}  // namespace

TEST_CASE("training on a one-route toy decreases the loss monotonically") {
  RouteToy toy;
  ModelContext ctx = toy_context(toy);
  std::vector<Query> queries = make_queries(toy.paths);

  TrainConfig tc;
  tc.learning_rate = 0.01;  // small enough for monotone descent
  tc.epochs = 150;
  tc.patience = 1000;
  tc.seed = 4;
  TrainResult r = train(ctx, queries, queries, tc);

  REQUIRE(r.train_loss.size() > 10);
  CHECK(r.train_loss.front() > 0.01);
  for (std::size_t e = 1; e < r.train_loss.size(); ++e)
    CHECK(r.train_loss[e] <= r.train_loss[e - 1] + 1e-12);

  // final top-1 next-step accuracy on the route
  double p1 = precision_top_k(r.params, ctx, queries, 1);
  CHECK(p1 >= 95.0);
}

TEST_CASE("zero epochs returns the seeded initial parameters") {
  RouteToy toy;
  ModelContext ctx = toy_context(toy);
  std::vector<Query> queries = make_queries(toy.paths);
  TrainConfig tc;
  tc.epochs = 0;
  tc.seed = 12;
  TrainResult r = train(ctx, queries, queries, tc);
  CHECK(r.params == ModelParameters::seeded(ctx.mlp_shape(), 12));
  CHECK(r.train_loss.size() == 1);
}

TEST_CASE("training twice with one seed gives identical parameter bytes") {
  RouteToy toy;
  ModelContext ctx = toy_context(toy);
  std::vector<Query> queries = make_queries(toy.paths);
  TrainConfig tc;
  tc.epochs = 25;
  tc.seed = 99;
  TrainResult a = train(ctx, queries, queries, tc);
  TrainResult b = train(ctx, queries, queries, tc);
  CHECK(a.params == b.params);
  CHECK(a.train_loss == b.train_loss);

  testutil::TempDir tmp("det");
  save_checkpoint(tmp.path() / "a.txt", a.params, ctx.schema());
  save_checkpoint(tmp.path() / "b.txt", b.params, ctx.schema());
  CHECK(read_file(tmp.path() / "a.txt") == read_file(tmp.path() / "b.txt"));
}

TEST_CASE("divergent training aborts with a diagnostic") {
  RouteToy toy;
  ModelContext ctx = toy_context(toy);
  std::vector<Query> queries = make_queries(toy.paths);
  TrainConfig tc;
  tc.learning_rate = 1e9;  // guaranteed blow-up
  tc.epochs = 50;
  tc.divergence_threshold = 100.0;
  CHECK_THROWS_WITH_AS(train(ctx, queries, queries, tc),
                       doctest::Contains("diverged"), Error);
}

TEST_CASE("early stopping keeps the best validation parameters") {
  RouteToy toy;
  ModelContext ctx = toy_context(toy);
  std::vector<Query> queries = make_queries(toy.paths);
  TrainConfig tc;
  tc.epochs = 200;
  tc.patience = 5;
  tc.seed = 31;
  TrainResult r = train(ctx, queries, queries, tc);
  double best = r.val_loss[static_cast<std::size_t>(r.best_epoch)];
  for (double v : r.val_loss) CHECK(best <= v + 1e-15);
}
