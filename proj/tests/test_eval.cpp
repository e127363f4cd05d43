#include <doctest.h>

#include <cmath>

#include "pathx/eval.hpp"
#include "test_util.hpp"

using namespace pathx;

namespace {

ModelContext make_context(const NavGraph& g, const std::vector<Trajectory>& train,
                          ModelConfig config = {}) {
  NodeFeatureMatrix nf = node_degree_features(g);
  EdgeFeatureMatrix ef = compute_edge_features(g, train, nullptr, FeatureConfig::Both);
  return ModelContext(g, nf, ef, std::move(config));
}

ModelParameters zero_params(const ModelContext& ctx) {
  return ModelParameters(ctx.mlp_shape(),
                         std::vector<double>(static_cast<std::size_t>(
                             ctx.mlp_shape().num_params()), 0.0));
}

}  // namespace

TEST_CASE("target probability on a deterministic chain is 100") {
  NavGraph g = build_graph({{"A", "B"}, {"B", "C"}, {"C", "D"}}, {"A", "B", "C", "D"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 1);
  std::vector<Query> queries = {{0, {0, 1}, {2, 3}}};
  CHECK(target_probability(params, ctx, queries) == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(target_probability(params, ctx, queries, TargetProbabilityVariant::Indicator) ==
        doctest::Approx(100.0));
}

TEST_CASE("uniform model on a binary fork at horizon 1 gives 50") {
  NavGraph g = build_graph({{"A", "B"}, {"A", "C"}}, {"A", "B", "C"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  std::vector<Query> queries = {{0, {0}, {1}}};
  CHECK(target_probability(zero_params(ctx), ctx, queries) ==
        doctest::Approx(50.0).epsilon(1e-9));
  // the indicator variant counts any nonzero support as a hit
  CHECK(target_probability(zero_params(ctx), ctx, queries,
                           TargetProbabilityVariant::Indicator) ==
        doctest::Approx(100.0));
}

TEST_CASE("metrics reject an empty test set") {
  NavGraph g = build_graph({{"A", "B"}}, {"A", "B"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  ModelParameters params = zero_params(ctx);
  CHECK_THROWS_AS(target_probability(params, ctx, {}), DomainError);
  CHECK_THROWS_AS(choice_accuracy(params, ctx, {}), DomainError);
  CHECK_THROWS_AS(precision_top_k(params, ctx, {}, 1), DomainError);
}

TEST_CASE("choice accuracy is undefined when no crossroads qualify") {
  NavGraph g = build_graph({{"A", "B"}, {"B", "C"}, {"A", "C"}}, {"A", "B", "C"});
  // max out-degree is 2
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  std::vector<Query> queries = {{0, {0}, {1, 2}}};
  CHECK_FALSE(choice_accuracy(zero_params(ctx), ctx, queries).has_value());
}

TEST_CASE("choice accuracy at a favorable 3-way fork is 100") {
  NavGraph g = build_graph({{"A", "B"}, {"A", "C"}, {"A", "D"}, {"Z", "A"}},
                           {"A", "B", "C", "D", "Z"});
  std::vector<Trajectory> train;
  // bias edge features so the logit of A->B dominates: nof counts do it
  std::vector<Trajectory> nof_train = {{0, {0, 1}, 1, 1}, {1, {4, 0}, 1, 1}};
  NodeFeatureMatrix nf = node_degree_features(g);
  EdgeFeatureMatrix ef = compute_edge_features(g, nof_train, nullptr,
                                               FeatureConfig::Original);
  ModelConfig config;
  config.hidden = {};
  ModelContext ctx(g, nf, ef, config);
  // linear model reading only the nof column (last input)
  std::vector<double> flat(static_cast<std::size_t>(ctx.mlp_shape().num_params()), 0.0);
  flat[static_cast<std::size_t>(ctx.mlp_shape().input_width) - 1] = 3.0;
  ModelParameters params(ctx.mlp_shape(), flat);

  std::vector<Query> queries = {{0, {4, 0}, {1}}};  // Z,A then B
  auto acc = choice_accuracy(params, ctx, queries);
  REQUIRE(acc.has_value());
  CHECK(*acc == doctest::Approx(100.0));
}

TEST_CASE("uniform weights break ties by ascending node id") {
  // two 3-way forks; the true next is the smallest id at one of them only
  NavGraph g = build_graph({{"A", "B"}, {"A", "C"}, {"A", "D"}},
                           {"A", "B", "C", "D"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  ModelParameters params = zero_params(ctx);
  std::vector<Query> to_b = {{0, {0}, {1}}};  // B is the smallest successor id
  std::vector<Query> to_c = {{1, {0}, {2}}};
  CHECK(*choice_accuracy(params, ctx, to_b) == doctest::Approx(100.0));
  CHECK(*choice_accuracy(params, ctx, to_c) == doctest::Approx(0.0));
  CHECK(precision_top_k(params, ctx, to_b, 1) == doctest::Approx(100.0));
  CHECK(precision_top_k(params, ctx, to_c, 1) == doctest::Approx(0.0));
  CHECK(precision_top_k(params, ctx, to_c, 5) == doctest::Approx(100.0));
}

TEST_CASE("precision top-5 counts any hit among few successors") {
  NavGraph g = build_graph({{"A", "B"}, {"A", "C"}, {"A", "D"}},
                           {"A", "B", "C", "D"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  std::vector<Query> queries = {{0, {0}, {3}}};
  CHECK(precision_top_k(zero_params(ctx), ctx, queries, 5) == doctest::Approx(100.0));
}

TEST_CASE("precision top-1 of a deterministic chain is 100") {
  NavGraph g = build_graph({{"A", "B"}, {"B", "C"}}, {"A", "B", "C"});
  std::vector<Trajectory> train;
  ModelContext ctx = make_context(g, train);
  std::vector<Query> queries = {{0, {0}, {1, 2}}};
  CHECK(precision_top_k(zero_params(ctx), ctx, queries, 1) == doctest::Approx(100.0));
}

TEST_CASE("precision matches an independent re-ranking oracle") {
  Rng rng(83);
  NavGraph g = testutil::random_graph(10, 35, rng);
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 12; ++i) {
    std::vector<NodeId> walk = testutil::random_walk(g, rng, 5);
    if (walk.size() < 3) continue;
    Trajectory t;
    t.path_id = i;
    t.node_ids = walk;
    apply_default_split(t);
    trajs.push_back(t);
  }
  REQUIRE(!trajs.empty());
  ModelContext ctx = make_context(g, trajs);
  ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 17);
  std::vector<Query> queries = make_queries(trajs);

  for (int k : {1, 5}) {
    double fast = precision_top_k(params, ctx, queries, k);
    // independent recomputation with a stable re-sort
    int hits = 0, total = 0;
    for (const Query& q : queries) {
      std::vector<NodeId> full = q.prefix;
      full.insert(full.end(), q.suffix.begin(), q.suffix.end());
      for (std::size_t p = q.prefix.size(); p < full.size(); ++p) {
        std::vector<NodeId> prefix(full.begin(),
                                   full.begin() + static_cast<std::ptrdiff_t>(p));
        EdgeWeights w = ctx.weights_for_prefix(params, prefix);
        NodeId cur = full[p - 1];
        std::vector<std::pair<double, NodeId>> order;
        for (EdgeId e : g.out_edges(cur))
          order.emplace_back(-w.weights[static_cast<std::size_t>(e)], g.edge(e).dst);
        std::sort(order.begin(), order.end());
        ++total;
        for (int r = 0; r < k && r < static_cast<int>(order.size()); ++r)
          if (order[static_cast<std::size_t>(r)].second == full[p]) {
            ++hits;
            break;
          }
      }
    }
    double oracle = total ? 100.0 * hits / total : 0.0;
    CHECK(fast == doctest::Approx(oracle).epsilon(1e-12));
    if (k == 1) CHECK(fast <= precision_top_k(params, ctx, queries, 5) + 1e-12);
  }
}

TEST_CASE("walk oracle handles the trivial cases and enforces its cap") {
  NavGraph chain = build_graph({{"A", "B"}, {"B", "C"}}, {"A", "B", "C"});
  EdgeWeights w = normalize_weights({0, 0}, chain);
  AgentState out = brute_force_walk_oracle(chain, w, one_hot_state(3, 0), 2);
  CHECK(out.x[2] == doctest::Approx(1.0));

  NavGraph cyc = build_graph({{"A", "B"}, {"B", "C"}, {"C", "A"}}, {"A", "B", "C"});
  EdgeWeights wc = normalize_weights({0, 0, 0}, cyc);
  AgentState back = brute_force_walk_oracle(cyc, wc, one_hot_state(3, 0), 3);
  CHECK(back.x[0] == doctest::Approx(1.0));

  Rng rng(89);
  NavGraph big = testutil::random_graph(13, 30, rng);
  EdgeWeights wb = testutil::random_weights(big, rng);
  CHECK_THROWS_AS(brute_force_walk_oracle(big, wb, one_hot_state(13, 0), 2),
                  DomainError);
}

TEST_CASE("experiment matrix bookkeeping and determinism") {
  Rng rng(97);
  Dataset ds;
  ds.graph = testutil::random_graph(14, 45, rng);
  for (int i = 0; i < 30; ++i) {
    std::vector<NodeId> walk = testutil::random_walk(ds.graph, rng, 5);
    if (walk.empty()) continue;
    if (walk.size() < 4) continue;
    Trajectory t;
    t.path_id = static_cast<PathId>(ds.trajectories.size());
    t.node_ids = walk;
    apply_default_split(t);
    ds.trajectories.push_back(t);
  }
  REQUIRE(ds.trajectories.size() >= 10);
  ds.categories.assign(static_cast<std::size_t>(ds.graph.num_nodes()),
                       "subject.General");

  MatrixOptions options;
  options.trainer.epochs = 5;
  options.dataset_label = "toy";
  std::vector<FeatureConfig> configs = {FeatureConfig::Original,
                                        FeatureConfig::SimHyperedge};
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  std::vector<MetricsReport> reports =
      run_experiment_matrix(ds, configs, seeds, options);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].config_label == "Original Edges");
  CHECK(reports[1].config_label == "Similarity-Hyperedge");
  for (const MetricsReport& r : reports) {
    CHECK(r.runs == 3);
    CHECK(r.target_probability.mean >= 0.0);
    CHECK(r.target_probability.mean <= 100.0);
    CHECK(r.precision_top1.mean <= r.precision_top5.mean + 1e-12);
  }

  std::vector<MetricsReport> again = run_experiment_matrix(ds, configs, seeds, options);
  CHECK(format_report_tsv(reports) == format_report_tsv(again));
  CHECK(format_report_table(reports) == format_report_table(again));

  std::string table = format_report_table(reports);
  CHECK(table.find("Metrics") != std::string::npos);
  CHECK(table.find("target probability") != std::string::npos);
  CHECK(table.find("choice accuracy") != std::string::npos);
  CHECK(table.find("precision top1") != std::string::npos);
  CHECK(table.find("precision top5") != std::string::npos);
  CHECK(table.find("Original Edges") != std::string::npos);
}

TEST_CASE("metrics are invariant under node relabeling with distinct weights") {
  // same graph built with two different node orders
  std::vector<std::pair<std::string, std::string>> edges = {
      {"A", "B"}, {"A", "C"}, {"A", "D"}, {"B", "D"}, {"C", "D"}, {"D", "E"}};
  NavGraph g1 = build_graph(edges, {"A", "B", "C", "D", "E"});
  NavGraph g2 = build_graph(edges, {"E", "D", "C", "B", "A"});

  auto eval_on = [&](const NavGraph& g) {
    std::vector<Trajectory> train = {
        {0, {g.find_title("A"), g.find_title("B"), g.find_title("D")}, 1, 2},
        {1, {g.find_title("A"), g.find_title("C"), g.find_title("D")}, 1, 2}};
    ModelContext ctx = make_context(g, train);
    // zero-seeded parameters give weights that depend only on features,
    // which are relabel-invariant here
    ModelParameters params = ModelParameters::seeded(ctx.mlp_shape(), 55);
    std::vector<Query> queries = make_queries(train);
    return std::tuple{target_probability(params, ctx, queries),
                      precision_top_k(params, ctx, queries, 1),
                      precision_top_k(params, ctx, queries, 5)};
  };
  auto [tp1, p11, p51] = eval_on(g1);
  auto [tp2, p12, p52] = eval_on(g2);
  CHECK(tp1 == doctest::Approx(tp2).epsilon(1e-9));
  CHECK(p11 == doctest::Approx(p12).epsilon(1e-9));
  CHECK(p51 == doctest::Approx(p52).epsilon(1e-9));
}
