#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "pathx/categorize.hpp"
#include "pathx/corpus.hpp"
#include "pathx/dataset.hpp"
#include "pathx/eval.hpp"
#include "pathx/features.hpp"
#include "pathx/model.hpp"
#include "pathx/text.hpp"
#include "pathx/tfidf.hpp"
#include "pathx/version.hpp"

namespace fs = std::filesystem;
using namespace pathx;

namespace {

/// Usage-level failure: wrong arguments or missing prerequisites.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p))
    throw UsageError(std::string(what) + " does not exist: " + p.string());
}

void write_manifest(const fs::path& dir, std::map<std::string, std::string> entries) {
  entries["code_version"] = kVersion;
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  write_file(dir / "manifest.txt", out);
}

SplitRatios parse_ratios(const std::string& s) {
  std::vector<std::string> parts = split(s, ',');
  if (parts.size() != 3) throw UsageError("--ratios expects three comma-joined values");
  SplitRatios r;
  r.train = std::stod(parts[0]);
  r.validation = std::stod(parts[1]);
  r.test = std::stod(parts[2]);
  return r;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const std::string& p : split(s, ','))
    out.push_back(static_cast<int>(parse_int(p, "integer list")));
  return out;
}

TfidfModel fit_tfidf_for_graph(const NavGraph& graph, CorpusSource& corpus) {
  std::vector<std::string> bodies;
  bodies.reserve(static_cast<std::size_t>(graph.num_nodes()));
  for (const ArticleNode& n : graph.nodes()) {
    auto doc = corpus.fetch(n.title);
    bodies.push_back(doc ? doc->body : std::string());
  }
  return TfidfModel::fit(bodies);
}

struct FeatureFiles {
  NodeFeatureMatrix node;
  EdgeFeatureMatrix edge;
};

FeatureFiles load_feature_files(const fs::path& dir) {
  require_exists(dir / "node_features.tsv", "node feature file");
  require_exists(dir / "edge_features.tsv", "edge feature file");
  FeatureFiles f;
  auto [ns, nv] = read_feature_tsv(dir / "node_features.tsv");
  auto [es, ev] = read_feature_tsv(dir / "edge_features.tsv");
  f.node = {std::move(nv), std::move(ns)};
  f.edge = {std::move(ev), std::move(es)};
  return f;
}

// ---------------------------------------------------------------------------

struct BuildDatasetArgs {
  std::string corpus_dir;
  std::string out_dir;
  std::string seed_title = "Central Macedonia";
  int num_paths = 3000;
  std::string policy = "sparse";
  int min_len = 4;
  int max_len = 7;
  int dense_window = 5;
  std::uint64_t seed = 0;
  bool window_before_filter = false;
  bool restart_prior = false;
  bool allow_network = false;
  std::string live_host;
  int live_port = 80;
  std::string live_prefix = "/doc/";
  std::string sparql_host;
  int sparql_port = 80;
  std::string sparql_path = "/sparql";
};

int cmd_build_dataset(const BuildDatasetArgs& a) {
  CrawlConfig config;
  config.seed_title = a.seed_title;
  config.num_paths = a.num_paths;
  config.min_len = a.min_len;
  config.max_len = a.max_len;
  config.policy = a.policy == "dense" ? CrawlPolicy::Dense : CrawlPolicy::Sparse;
  config.dense_window = a.dense_window;
  config.rng_seed = a.seed;
  config.window_before_filter = a.window_before_filter;
  config.restart_from_prior = a.restart_prior;

  std::unique_ptr<CorpusSource> source;
  SystemClock clock;
  if (!a.corpus_dir.empty()) {
    require_exists(a.corpus_dir, "corpus directory");
    source = std::make_unique<SnapshotCorpus>(a.corpus_dir);
  } else if (!a.live_host.empty()) {
    if (!a.allow_network)
      throw UsageError("live fetching requires --allow-network");
    const char* cache = std::getenv("PATHX_CACHE_DIR");
    source = std::make_unique<LiveCorpus>(a.live_host, a.live_port, a.live_prefix,
                                          clock, 1.0, "pathx-crawler/0.1",
                                          cache ? fs::path(cache) : fs::path());
  } else {
    throw UsageError("build-dataset needs --corpus or --live-host");
  }

  CategorizeFn categorizer;
  std::unique_ptr<HttpSparqlClient> sparql;
  if (!a.sparql_host.empty()) {
    if (!a.allow_network)
      throw UsageError("SPARQL categorization requires --allow-network");
    sparql = std::make_unique<HttpSparqlClient>(a.sparql_host, a.sparql_port,
                                                a.sparql_path, clock, 1.0);
    categorizer = [&](const std::string& title) {
      return categorize(title, *sparql).category;
    };
  }

  Dataset ds = generate_dataset(*source, config, categorizer);
  fs::create_directories(a.out_dir);
  save_dataset(ds, a.out_dir);
  write_graphml(ds.graph, fs::path(a.out_dir) / "graph.graphml");
  write_manifest(a.out_dir,
                 {{"command", "build-dataset"},
                  {"corpus", a.corpus_dir},
                  {"seed_title", a.seed_title},
                  {"paths", std::to_string(a.num_paths)},
                  {"policy", a.policy},
                  {"min_len", std::to_string(a.min_len)},
                  {"max_len", std::to_string(a.max_len)},
                  {"dense_window", std::to_string(a.dense_window)},
                  {"window_before_filter", a.window_before_filter ? "1" : "0"},
                  {"restart_prior", a.restart_prior ? "1" : "0"},
                  {"seed", std::to_string(a.seed)}});

  double d = density(ds.graph.num_nodes(), ds.graph.num_edges());
  std::cout << "dataset: n=" << ds.graph.num_nodes() << " m=" << ds.graph.num_edges()
            << " paths=" << ds.trajectories.size() << " density=" << format_double(d, 8)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string dataset_dir;
  std::string out_dir;
  std::string corpus_dir;
  std::string features = "original";
  std::string ratios = "0.8,0.1,0.1";
  std::uint64_t split_seed = 0;
};

int cmd_extract_features(const ExtractArgs& a) {
  require_exists(a.dataset_dir, "dataset directory");
  FeatureConfig config = parse_feature_config(a.features);
  Dataset ds = load_dataset(a.dataset_dir);
  DatasetSplit split =
      split_dataset(ds.trajectories, parse_ratios(a.ratios), a.split_seed);

  std::unique_ptr<SnapshotCorpus> corpus;
  std::unique_ptr<TfidfModel> tfidf;
  if (!a.corpus_dir.empty()) {
    require_exists(a.corpus_dir, "corpus directory");
    corpus = std::make_unique<SnapshotCorpus>(a.corpus_dir);
    tfidf = std::make_unique<TfidfModel>(fit_tfidf_for_graph(ds.graph, *corpus));
  }

  NodeFeatureMatrix node_f = node_degree_features(ds.graph);
  EdgeFeatureMatrix edge_f =
      compute_edge_features(ds.graph, split.train, tfidf.get(), config);

  fs::create_directories(a.out_dir);
  write_feature_tsv(fs::path(a.out_dir) / "node_features.tsv", "node_id",
                    node_f.schema, node_f.values);
  write_feature_tsv(fs::path(a.out_dir) / "edge_features.tsv", "edge_id",
                    edge_f.schema, edge_f.values);
  write_manifest(a.out_dir, {{"command", "extract-features"},
                             {"dataset", a.dataset_dir},
                             {"corpus", a.corpus_dir},
                             {"features", a.features},
                             {"ratios", a.ratios},
                             {"split_seed", std::to_string(a.split_seed)}});
  std::cout << "features: nodes=" << node_f.values.rows()
            << " edges=" << edge_f.values.rows() << " edge_width=" << edge_f.values.cols()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string dataset_dir;
  std::string features_dir;
  std::string out_dir;
  std::string ratios = "0.8,0.1,0.1";
  std::uint64_t split_seed = 0;
  std::uint64_t seed = 0;
  int epochs = 200;
  double lr = 0.05;
  int patience = 20;
  std::string hidden = "16,16";
  int coord_depth = 3;
  double coord_decay = 0.7;
  std::string mode = "head";
};

int cmd_train(const TrainArgs& a) {
  require_exists(a.dataset_dir, "dataset directory");
  require_exists(a.features_dir, "feature directory");
  Dataset ds = load_dataset(a.dataset_dir);
  FeatureFiles ff = load_feature_files(a.features_dir);
  DatasetSplit split =
      split_dataset(ds.trajectories, parse_ratios(a.ratios), a.split_seed);

  ModelConfig mc;
  mc.coord_depth = a.coord_depth;
  mc.coord_decay = a.coord_decay;
  mc.hidden = parse_int_list(a.hidden);
  mc.mode = a.mode == "pinv" ? ProjectionMode::Pseudoinverse
                             : ProjectionMode::HeadProjection;
  ModelContext ctx(ds.graph, ff.node, ff.edge, mc);

  TrainConfig tc;
  tc.learning_rate = a.lr;
  tc.epochs = a.epochs;
  tc.patience = a.patience;
  tc.seed = a.seed;

  TrainResult result =
      train(ctx, make_queries(split.train), make_queries(split.validation), tc);

  fs::create_directories(a.out_dir);
  save_checkpoint(fs::path(a.out_dir) / "checkpoint.txt", result.params, ctx.schema());
  std::string history = "epoch\ttrain_loss\tval_loss\n";
  for (std::size_t e = 0; e < result.train_loss.size(); ++e)
    history += std::to_string(e) + "\t" + format_double(result.train_loss[e], 9) +
               "\t" + format_double(result.val_loss[e], 9) + "\n";
  write_file(fs::path(a.out_dir) / "history.tsv", history);
  write_manifest(a.out_dir, {{"command", "train"},
                             {"dataset", a.dataset_dir},
                             {"features", a.features_dir},
                             {"ratios", a.ratios},
                             {"split_seed", std::to_string(a.split_seed)},
                             {"seed", std::to_string(a.seed)},
                             {"epochs", std::to_string(a.epochs)},
                             {"learning_rate", format_double(a.lr, 6)},
                             {"patience", std::to_string(a.patience)},
                             {"hidden", a.hidden},
                             {"coord_depth", std::to_string(a.coord_depth)},
                             {"coord_decay", format_double(a.coord_decay, 6)},
                             {"mode", a.mode}});
  std::cout << "trained: epochs=" << result.train_loss.size() - 1
            << " best_epoch=" << result.best_epoch
            << " best_val_loss=" << format_double(result.val_loss[static_cast<std::size_t>(result.best_epoch)], 6)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset_dir;
  std::string features_dir;
  std::string checkpoint;
  std::string out_dir;
  std::string ratios = "0.8,0.1,0.1";
  std::uint64_t split_seed = 0;
  std::string choice_degree = "out";
  std::string label = "dataset";
};

int cmd_evaluate(const EvaluateArgs& a) {
  require_exists(a.dataset_dir, "dataset directory");
  require_exists(a.features_dir, "feature directory");
  require_exists(a.checkpoint, "checkpoint file");
  Dataset ds = load_dataset(a.dataset_dir);
  FeatureFiles ff = load_feature_files(a.features_dir);
  auto [params, schema] = load_checkpoint(a.checkpoint);

  ModelConfig mc;
  mc.coord_depth = schema.coord_depth;
  mc.coord_decay = schema.coord_decay;
  mc.hidden = schema.hidden;
  ModelContext ctx(ds.graph, ff.node, ff.edge, mc);
  ensure_schema_match(schema, ctx.schema());

  DatasetSplit split =
      split_dataset(ds.trajectories, parse_ratios(a.ratios), a.split_seed);
  std::vector<Query> test_q = make_queries(split.test);
  ChoiceDegreeMode cd = a.choice_degree == "total" ? ChoiceDegreeMode::TotalDegree
                                                   : ChoiceDegreeMode::OutDegree;

  MetricsReport rep;
  rep.dataset_label = a.label;
  rep.config_label = join(ff.edge.schema, '+');
  rep.runs = 1;
  rep.target_probability = {
      target_probability(params, ctx, test_q, TargetProbabilityVariant::Mass), 0.0};
  rep.target_probability_indicator = {
      target_probability(params, ctx, test_q, TargetProbabilityVariant::Indicator), 0.0};
  std::optional<double> ca = choice_accuracy(params, ctx, test_q, cd);
  rep.choice_defined = ca.has_value();
  if (ca) rep.choice_accuracy = {*ca, 0.0};
  rep.precision_top1 = {precision_top_k(params, ctx, test_q, 1), 0.0};
  rep.precision_top5 = {precision_top_k(params, ctx, test_q, 5), 0.0};

  std::vector<MetricsReport> reports = {rep};
  fs::create_directories(a.out_dir);
  write_file(fs::path(a.out_dir) / "report.tsv", format_report_tsv(reports));
  write_file(fs::path(a.out_dir) / "report.txt", format_report_table(reports));
  write_manifest(a.out_dir, {{"command", "evaluate"},
                             {"dataset", a.dataset_dir},
                             {"features", a.features_dir},
                             {"checkpoint", a.checkpoint},
                             {"ratios", a.ratios},
                             {"split_seed", std::to_string(a.split_seed)},
                             {"choice_degree", a.choice_degree}});
  std::cout << format_report_table(reports);
  return 0;
}

// ---------------------------------------------------------------------------

struct MatrixArgs {
  std::string dataset_dir;
  std::string out_dir;
  std::string corpus_dir;
  std::string configs = "original,sim,dhnode,both";
  std::string seeds = "1,2,3";
  std::string ratios = "0.8,0.1,0.1";
  std::uint64_t split_seed = 0;
  int epochs = 200;
  double lr = 0.05;
  int patience = 20;
  std::string label = "dataset";
};

int cmd_matrix(const MatrixArgs& a) {
  require_exists(a.dataset_dir, "dataset directory");
  Dataset ds = load_dataset(a.dataset_dir);

  std::vector<FeatureConfig> configs;
  for (const std::string& c : split(a.configs, ','))
    configs.push_back(parse_feature_config(c));
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split(a.seeds, ','))
    seeds.push_back(static_cast<std::uint64_t>(parse_int(s, "seed")));

  std::unique_ptr<SnapshotCorpus> corpus;
  std::unique_ptr<TfidfModel> tfidf;
  if (!a.corpus_dir.empty()) {
    require_exists(a.corpus_dir, "corpus directory");
    corpus = std::make_unique<SnapshotCorpus>(a.corpus_dir);
    tfidf = std::make_unique<TfidfModel>(fit_tfidf_for_graph(ds.graph, *corpus));
  }

  MatrixOptions options;
  options.ratios = parse_ratios(a.ratios);
  options.split_seed = a.split_seed;
  options.trainer.epochs = a.epochs;
  options.trainer.learning_rate = a.lr;
  options.trainer.patience = a.patience;
  options.dataset_label = a.label;
  options.tfidf = tfidf.get();

  std::vector<MetricsReport> reports =
      run_experiment_matrix(ds, configs, seeds, options);

  fs::create_directories(a.out_dir);
  write_file(fs::path(a.out_dir) / "report.tsv", format_report_tsv(reports));
  write_file(fs::path(a.out_dir) / "report.txt", format_report_table(reports));
  std::string manifest =
      format_run_manifest(dataset_fingerprint(a.dataset_dir), configs, seeds, options);
  std::optional<bool> directional = dht_beats_original_on_top5(reports);
  manifest += "dht_beats_original_on_top5=";
  manifest += directional ? (*directional ? "yes" : "no") : "n/a";
  manifest += "\n";
  write_file(fs::path(a.out_dir) / "manifest.txt", manifest);

  std::cout << format_report_table(reports);
  if (directional)
    std::cout << "directional check (non-gating): DHT-augmented beats original on "
                 "precision top5: "
              << (*directional ? "yes" : "no") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string dataset_dir;
  std::string features_dir;
  std::string checkpoint;
  std::string prefix;
  int horizon = 2;
  int top = 5;
};

int cmd_predict(const PredictArgs& a) {
  require_exists(a.dataset_dir, "dataset directory");
  require_exists(a.features_dir, "feature directory");
  require_exists(a.checkpoint, "checkpoint file");
  Dataset ds = load_dataset(a.dataset_dir);
  FeatureFiles ff = load_feature_files(a.features_dir);
  auto [params, schema] = load_checkpoint(a.checkpoint);

  ModelConfig mc;
  mc.coord_depth = schema.coord_depth;
  mc.coord_decay = schema.coord_decay;
  mc.hidden = schema.hidden;
  ModelContext ctx(ds.graph, ff.node, ff.edge, mc);
  ensure_schema_match(schema, ctx.schema());

  std::vector<NodeId> prefix_ids;
  for (const std::string& title : split(a.prefix, ',')) {
    NodeId v = ds.graph.find_title(title);
    if (v == kNoNode) throw Error("unknown title in prefix: '" + title + "'");
    prefix_ids.push_back(v);
  }
  if (prefix_ids.empty()) throw UsageError("--prefix must name at least one article");

  EdgeWeights w = ctx.weights_for_prefix(params, prefix_ids);

  // best-first search over non-backtracking suffixes; step probabilities
  // are <= 1 so the first `top` completed suffixes are exact
  struct Partial {
    double prob;
    std::vector<NodeId> nodes;  // suffix so far
    EdgeId last_edge;
    bool operator<(const Partial& o) const { return prob < o.prob; }
  };
  EdgeId prefix_last = kNoEdge;
  if (prefix_ids.size() >= 2)
    prefix_last = ds.graph.find_edge(prefix_ids[prefix_ids.size() - 2],
                                     prefix_ids[prefix_ids.size() - 1]);

  std::priority_queue<Partial> queue;
  queue.push({1.0, {}, prefix_last});
  std::vector<std::pair<std::vector<NodeId>, double>> results;
  while (!queue.empty() && static_cast<int>(results.size()) < a.top) {
    Partial cur = queue.top();
    queue.pop();
    if (static_cast<int>(cur.nodes.size()) == a.horizon) {
      results.emplace_back(cur.nodes, cur.prob);
      continue;
    }
    NodeId at = cur.nodes.empty() ? prefix_ids.back() : cur.nodes.back();
    for (EdgeId e : ds.graph.out_edges(at)) {
      const DirectedEdge& edge = ds.graph.edge(e);
      double step;
      if (cur.last_edge == kNoEdge) {
        step = w.weights[static_cast<std::size_t>(e)];
      } else {
        const DirectedEdge& prev = ds.graph.edge(cur.last_edge);
        if (edge.dst == prev.src) continue;  // backtrack
        EdgeId bt = ds.graph.find_edge(edge.src, prev.src);
        double den = bt == kNoEdge ? 1.0 : 1.0 - w.weights[static_cast<std::size_t>(bt)];
        if (den <= 0.0) continue;
        step = w.weights[static_cast<std::size_t>(e)] / den;
      }
      if (step <= 0.0) continue;
      Partial nxt;
      nxt.prob = cur.prob * step;
      nxt.nodes = cur.nodes;
      nxt.nodes.push_back(edge.dst);
      nxt.last_edge = e;
      queue.push(std::move(nxt));
    }
  }

  std::cout << "suffix\tprobability\n";
  for (const auto& [nodes, prob] : results) {
    std::vector<std::string> titles;
    for (NodeId v : nodes) titles.push_back(ds.graph.node(v).title);
    std::cout << join(titles, ',') << "\t" << format_double(prob, 6) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigation-path extrapolation toolkit"};
  app.set_config("--config", "", "Flat key=value config file; flags override");
  app.require_subcommand(1);

  BuildDatasetArgs bd;
  CLI::App* build = app.add_subcommand("build-dataset",
                                       "Generate a dataset by random walks over a corpus");
  build->add_option("--corpus", bd.corpus_dir, "Snapshot corpus directory");
  build->add_option("--out", bd.out_dir, "Output dataset directory")->required();
  build->add_option("--seed-title", bd.seed_title, "Start article");
  build->add_option("--paths", bd.num_paths, "Number of paths");
  build->add_option("--policy", bd.policy, "dense|sparse")
      ->check(CLI::IsMember({"dense", "sparse"}));
  build->add_option("--min-len", bd.min_len);
  build->add_option("--max-len", bd.max_len);
  build->add_option("--dense-window", bd.dense_window);
  build->add_option("--seed", bd.seed, "RNG seed");
  build->add_flag("--window-before-filter", bd.window_before_filter,
                  "Cut the dense window before validity filtering");
  build->add_flag("--restart-prior", bd.restart_prior,
                  "Restart walks from random prior nodes");
  build->add_flag("--allow-network", bd.allow_network, "Permit live HTTP fetching");
  build->add_option("--live-host", bd.live_host);
  build->add_option("--live-port", bd.live_port);
  build->add_option("--live-prefix", bd.live_prefix);
  build->add_option("--sparql-host", bd.sparql_host);
  build->add_option("--sparql-port", bd.sparql_port);
  build->add_option("--sparql-path", bd.sparql_path);

  ExtractArgs ex;
  CLI::App* extract = app.add_subcommand("extract-features",
                                         "Compute node and edge feature matrices");
  extract->add_option("--dataset", ex.dataset_dir)->required();
  extract->add_option("--out", ex.out_dir)->required();
  extract->add_option("--corpus", ex.corpus_dir, "Corpus for TF-IDF bodies");
  extract->add_option("--features", ex.features, "original|sim|dhnode|both")
      ->check(CLI::IsMember({"original", "sim", "dhnode", "both"}));
  extract->add_option("--ratios", ex.ratios);
  extract->add_option("--split-seed", ex.split_seed);

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the path predictor");
  train_cmd->add_option("--dataset", tr.dataset_dir)->required();
  train_cmd->add_option("--features", tr.features_dir)->required();
  train_cmd->add_option("--out", tr.out_dir)->required();
  train_cmd->add_option("--ratios", tr.ratios);
  train_cmd->add_option("--split-seed", tr.split_seed);
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--lr", tr.lr);
  train_cmd->add_option("--patience", tr.patience);
  train_cmd->add_option("--hidden", tr.hidden);
  train_cmd->add_option("--coord-depth", tr.coord_depth);
  train_cmd->add_option("--coord-decay", tr.coord_decay);
  train_cmd->add_option("--mode", tr.mode, "head|pinv")
      ->check(CLI::IsMember({"head", "pinv"}));

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  evaluate->add_option("--dataset", ev.dataset_dir)->required();
  evaluate->add_option("--features", ev.features_dir)->required();
  evaluate->add_option("--checkpoint", ev.checkpoint)->required();
  evaluate->add_option("--out", ev.out_dir)->required();
  evaluate->add_option("--ratios", ev.ratios);
  evaluate->add_option("--split-seed", ev.split_seed);
  evaluate->add_option("--choice-degree", ev.choice_degree, "out|total")
      ->check(CLI::IsMember({"out", "total"}));
  evaluate->add_option("--label", ev.label);

  MatrixArgs mx;
  CLI::App* matrix = app.add_subcommand(
      "matrix", "Train and evaluate every feature configuration");
  matrix->add_option("--dataset", mx.dataset_dir)->required();
  matrix->add_option("--out", mx.out_dir)->required();
  matrix->add_option("--corpus", mx.corpus_dir);
  matrix->add_option("--configs", mx.configs);
  matrix->add_option("--seeds", mx.seeds);
  matrix->add_option("--ratios", mx.ratios);
  matrix->add_option("--split-seed", mx.split_seed);
  matrix->add_option("--epochs", mx.epochs);
  matrix->add_option("--lr", mx.lr);
  matrix->add_option("--patience", mx.patience);
  matrix->add_option("--label", mx.label);

  PredictArgs pr;
  CLI::App* predict = app.add_subcommand("predict", "Rank candidate path suffixes");
  predict->add_option("--dataset", pr.dataset_dir)->required();
  predict->add_option("--features", pr.features_dir)->required();
  predict->add_option("--checkpoint", pr.checkpoint)->required();
  predict->add_option("--prefix", pr.prefix, "Comma-joined article titles")->required();
  predict->add_option("--horizon", pr.horizon);
  predict->add_option("--top", pr.top);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return cmd_build_dataset(bd);
    if (extract->parsed()) return cmd_extract_features(ex);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    if (matrix->parsed()) return cmd_matrix(mx);
    if (predict->parsed()) return cmd_predict(pr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
