#include "pathx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "pathx/text.hpp"
#include "pathx/version.hpp"

namespace pathx {

namespace {

/// Steps of the ground-truth path from the prefix end to the target, each
/// with the prefix observed so far.
struct StepInstance {
  std::vector<NodeId> prefix;  // grows along the true path
  NodeId current;
  NodeId true_next;
};

std::vector<StepInstance> step_instances(const Query& q) {
  std::vector<StepInstance> out;
  std::vector<NodeId> full = q.prefix;
  full.insert(full.end(), q.suffix.begin(), q.suffix.end());
  for (std::size_t p = q.prefix.size(); p < full.size(); ++p) {
    StepInstance inst;
    inst.prefix.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(p));
    inst.current = full[p - 1];
    inst.true_next = full[p];
    out.push_back(std::move(inst));
  }
  return out;
}

/// Successor node ids of `current` ordered by descending weight, ties by
/// ascending node id.
std::vector<NodeId> ranked_successors(const NavGraph& graph,
                                      const EdgeWeights& weights, NodeId current) {
  std::vector<std::pair<double, NodeId>> scored;
  for (EdgeId e : graph.out_edges(current))
    scored.emplace_back(weights.weights[static_cast<std::size_t>(e)], graph.edge(e).dst);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& [w, v] : scored) out.push_back(v);
  return out;
}

template <typename PerQuery>
void parallel_queries(const std::vector<Query>& queries, const PerQuery& fn) {
  const int b = static_cast<int>(queries.size());
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < b; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(pathx_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double target_probability(const ModelParameters& params, const ModelContext& ctx,
                          const std::vector<Query>& queries,
                          TargetProbabilityVariant variant) {
  if (queries.empty()) throw DomainError("target probability over an empty test set");
  std::vector<double> per_query(queries.size(), 0.0);
  parallel_queries(queries, [&](std::size_t i) {
    AgentState xhat = ctx.predict(params, queries[i]);
    double mass = xhat.x[static_cast<std::size_t>(queries[i].target())];
    per_query[i] = variant == TargetProbabilityVariant::Mass
                       ? mass
                       : (mass > 0.0 ? 1.0 : 0.0);
  });
  double sum = 0.0;
  for (double v : per_query) sum += v;
  return 100.0 * sum / static_cast<double>(queries.size());
}

std::optional<double> choice_accuracy(const ModelParameters& params,
                                      const ModelContext& ctx,
                                      const std::vector<Query>& queries,
                                      ChoiceDegreeMode mode) {
  if (queries.empty()) throw DomainError("choice accuracy over an empty test set");
  const NavGraph& graph = ctx.graph();
  std::vector<std::pair<int, int>> per_query(queries.size(), {0, 0});  // hits, total
  parallel_queries(queries, [&](std::size_t i) {
    int hits = 0, total = 0;
    for (const StepInstance& inst : step_instances(queries[i])) {
      int degree = mode == ChoiceDegreeMode::OutDegree
                       ? graph.out_degree(inst.current)
                       : graph.out_degree(inst.current) + graph.in_degree(inst.current);
      if (degree < 3) continue;
      EdgeWeights w = ctx.weights_for_prefix(params, inst.prefix);
      std::vector<NodeId> ranked = ranked_successors(graph, w, inst.current);
      ++total;
      if (!ranked.empty() && ranked.front() == inst.true_next) ++hits;
    }
    per_query[i] = {hits, total};
  });
  int hits = 0, total = 0;
  for (const auto& [h, t] : per_query) {
    hits += h;
    total += t;
  }
  if (total == 0) return std::nullopt;  // undefined, not 0
  return 100.0 * hits / static_cast<double>(total);
}

double precision_top_k(const ModelParameters& params, const ModelContext& ctx,
                       const std::vector<Query>& queries, int k) {
  if (queries.empty()) throw DomainError("precision over an empty test set");
  if (k < 1) throw DomainError("precision requires k >= 1");
  const NavGraph& graph = ctx.graph();
  std::vector<std::pair<int, int>> per_query(queries.size(), {0, 0});
  parallel_queries(queries, [&](std::size_t i) {
    int hits = 0, total = 0;
    for (const StepInstance& inst : step_instances(queries[i])) {
      EdgeWeights w = ctx.weights_for_prefix(params, inst.prefix);
      std::vector<NodeId> ranked = ranked_successors(graph, w, inst.current);
      ++total;
      for (std::size_t r = 0; r < ranked.size() && r < static_cast<std::size_t>(k); ++r) {
        if (ranked[r] == inst.true_next) {
          ++hits;
          break;
        }
      }
    }
    per_query[i] = {hits, total};
  });
  int hits = 0, total = 0;
  for (const auto& [h, t] : per_query) {
    hits += h;
    total += t;
  }
  return total == 0 ? 0.0 : 100.0 * hits / static_cast<double>(total);
}

namespace {

void enumerate_walks(const NavGraph& graph, const EdgeWeights& weights,
                     EdgeId prev_edge, double prob, int remaining,
                     std::vector<double>& dist) {
  if (remaining == 0) {
    dist[static_cast<std::size_t>(graph.edge(prev_edge).dst)] += prob;
    return;
  }
  const DirectedEdge& pe = graph.edge(prev_edge);
  EdgeId bt = graph.find_edge(pe.dst, pe.src);
  double den = bt == kNoEdge ? 1.0 : 1.0 - weights.weights[static_cast<std::size_t>(bt)];
  if (den <= 0.0) return;  // trapped: mass dies
  for (EdgeId e : graph.out_edges(pe.dst)) {
    if (graph.edge(e).dst == pe.src) continue;  // no immediate backtrack
    enumerate_walks(graph, weights, e,
                    prob * weights.weights[static_cast<std::size_t>(e)] / den,
                    remaining - 1, dist);
  }
}

}  // namespace

AgentState brute_force_walk_oracle(const NavGraph& graph, const EdgeWeights& weights,
                                   const AgentState& x_t, int h) {
  if (graph.num_nodes() > 12 || h > 4)
    throw DomainError("walk oracle is capped at n <= 12, h <= 4");
  if (h < 1) throw DomainError("walk oracle requires h >= 1");
  std::vector<double> dist(static_cast<std::size_t>(graph.num_nodes()), 0.0);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    double start_mass = x_t.x[static_cast<std::size_t>(v)];
    if (start_mass == 0.0) continue;
    for (EdgeId e : graph.out_edges(v))
      enumerate_walks(graph, weights, e,
                      start_mass * weights.weights[static_cast<std::size_t>(e)], h - 1,
                      dist);
  }
  AgentState out;
  out.x = std::move(dist);
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

namespace {

MetricValue aggregate(const std::vector<double>& values) {
  MetricValue out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_metric(const MetricValue& v, bool defined) {
  if (!defined) return "undefined";
  return format_double(v.mean, 2) + " \xC2\xB1 " + format_double(v.stddev, 4);
}

}  // namespace

std::vector<MetricsReport> run_experiment_matrix(
    const Dataset& dataset, const std::vector<FeatureConfig>& configs,
    const std::vector<std::uint64_t>& seeds, const MatrixOptions& options) {
  if (configs.empty() || seeds.empty())
    throw DomainError("experiment matrix needs at least one config and one seed");

  DatasetSplit split =
      split_dataset(dataset.trajectories, options.ratios, options.split_seed);
  std::vector<Query> train_q = make_queries(split.train);
  std::vector<Query> val_q = make_queries(split.validation);
  std::vector<Query> test_q = make_queries(split.test);
  NodeFeatureMatrix node_f = node_degree_features(dataset.graph);

  std::vector<MetricsReport> reports;
  for (FeatureConfig config : configs) {
    EdgeFeatureMatrix edge_f =
        compute_edge_features(dataset.graph, split.train, options.tfidf, config);
    ModelContext ctx(dataset.graph, node_f, edge_f, options.model);

    std::vector<double> tp, tpi, ca, p1, p5;
    bool choice_defined = true;
    for (std::uint64_t seed : seeds) {
      TrainConfig tc = options.trainer;
      tc.seed = seed;
      TrainResult r = train(ctx, train_q, val_q, tc);
      tp.push_back(target_probability(r.params, ctx, test_q,
                                      TargetProbabilityVariant::Mass));
      tpi.push_back(target_probability(r.params, ctx, test_q,
                                       TargetProbabilityVariant::Indicator));
      std::optional<double> c =
          choice_accuracy(r.params, ctx, test_q, options.choice_degree);
      if (c)
        ca.push_back(*c);
      else
        choice_defined = false;
      p1.push_back(precision_top_k(r.params, ctx, test_q, 1));
      p5.push_back(precision_top_k(r.params, ctx, test_q, 5));
    }

    MetricsReport rep;
    rep.dataset_label = options.dataset_label;
    rep.config_label = feature_config_label(config);
    rep.runs = static_cast<int>(seeds.size());
    rep.target_probability = aggregate(tp);
    rep.target_probability_indicator = aggregate(tpi);
    rep.choice_defined = choice_defined;
    rep.choice_accuracy = aggregate(ca);
    rep.precision_top1 = aggregate(p1);
    rep.precision_top5 = aggregate(p5);
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string format_report_table(const std::vector<MetricsReport>& reports) {
  const char* metric_names[] = {"target probability", "choice accuracy",
                                "precision top1", "precision top5"};
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Metrics"};
  for (const MetricsReport& r : reports) header.push_back(r.config_label);
  cells.push_back(header);
  for (int row = 0; row < 4; ++row) {
    std::vector<std::string> line = {metric_names[row]};
    for (const MetricsReport& r : reports) {
      switch (row) {
        case 0: line.push_back(format_metric(r.target_probability, true)); break;
        case 1: line.push_back(format_metric(r.choice_accuracy, r.choice_defined)); break;
        case 2: line.push_back(format_metric(r.precision_top1, true)); break;
        case 3: line.push_back(format_metric(r.precision_top5, true)); break;
      }
    }
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::string out;
  if (!reports.empty()) {
    out += "Performance Metrics (%) on " + reports.front().dataset_label + "\n";
  }
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size())
        out += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

std::string format_report_tsv(const std::vector<MetricsReport>& reports) {
  std::string out = "config\tmetric\tmean\tstd\truns\n";
  auto row = [&](const MetricsReport& r, const char* metric, const MetricValue& v,
                 bool defined) {
    out += r.config_label;
    out += "\t";
    out += metric;
    out += "\t";
    out += defined ? format_double(v.mean, 6) : "undefined";
    out += "\t";
    out += defined ? format_double(v.stddev, 6) : "undefined";
    out += "\t" + std::to_string(r.runs) + "\n";
  };
  for (const MetricsReport& r : reports) {
    row(r, "target_probability", r.target_probability, true);
    row(r, "target_probability_indicator", r.target_probability_indicator, true);
    row(r, "choice_accuracy", r.choice_accuracy, r.choice_defined);
    row(r, "precision_top1", r.precision_top1, true);
    row(r, "precision_top5", r.precision_top5, true);
  }
  return out;
}

std::optional<bool> dht_beats_original_on_top5(
    const std::vector<MetricsReport>& reports) {
  const MetricsReport* original = nullptr;
  for (const MetricsReport& r : reports)
    if (r.config_label == feature_config_label(FeatureConfig::Original)) original = &r;
  if (!original) return std::nullopt;
  for (const MetricsReport& r : reports)
    if (&r != original && r.precision_top5.mean > original->precision_top5.mean)
      return true;
  return false;
}

std::string format_run_manifest(std::uint64_t dataset_hash,
                                const std::vector<FeatureConfig>& configs,
                                const std::vector<std::uint64_t>& seeds,
                                const MatrixOptions& options) {
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(dataset_hash));
  std::vector<std::string> config_names, seed_strs;
  for (FeatureConfig c : configs) config_names.push_back(feature_config_name(c));
  for (std::uint64_t s : seeds) seed_strs.push_back(std::to_string(s));
  std::string out;
  out += "code_version=" + std::string(kVersion) + "\n";
  out += "dataset_hash=" + std::string(hash_buf) + "\n";
  out += "dataset_label=" + options.dataset_label + "\n";
  out += "configs=" + join(config_names, ',') + "\n";
  out += "seeds=" + join(seed_strs, ',') + "\n";
  out += "split_seed=" + std::to_string(options.split_seed) + "\n";
  out += "split_ratios=" + format_double(options.ratios.train, 3) + "," +
         format_double(options.ratios.validation, 3) + "," +
         format_double(options.ratios.test, 3) + "\n";
  out += "coord_depth=" + std::to_string(options.model.coord_depth) + "\n";
  out += "coord_decay=" + format_double(options.model.coord_decay, 6) + "\n";
  out += "epochs=" + std::to_string(options.trainer.epochs) + "\n";
  out += "learning_rate=" + format_double(options.trainer.learning_rate, 6) + "\n";
  out += "patience=" + std::to_string(options.trainer.patience) + "\n";
  return out;
}

}  // namespace pathx
