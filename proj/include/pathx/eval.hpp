#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathx/dataset.hpp"
#include "pathx/features.hpp"
#include "pathx/model.hpp"
#include "pathx/tfidf.hpp"

namespace pathx {

/// The prose definition of target probability is ambiguous between the
/// mass placed on the true target (primary) and an indicator of nonzero
/// support (variant); both are computed and reported.
enum class TargetProbabilityVariant { Mass, Indicator };

enum class ChoiceDegreeMode { OutDegree, TotalDegree };

/// Mean predicted mass on the true target over the queries, as a
/// percentage.
double target_probability(const ModelParameters& params, const ModelContext& ctx,
                          const std::vector<Query>& queries,
                          TargetProbabilityVariant variant =
                              TargetProbabilityVariant::Mass);

/// Fraction of ground-truth steps between v_t and v_{t+h} taken at
/// crossroads (degree >= 3) where the model's top-weighted outgoing edge
/// matches the true step. Empty optional when no step qualifies.
std::optional<double> choice_accuracy(const ModelParameters& params,
                                      const ModelContext& ctx,
                                      const std::vector<Query>& queries,
                                      ChoiceDegreeMode mode = ChoiceDegreeMode::OutDegree);

/// Fraction of suffix steps whose true successor ranks within the k
/// highest-weighted successors of the current node (ties by ascending
/// node id), as a percentage.
double precision_top_k(const ModelParameters& params, const ModelContext& ctx,
                       const std::vector<Query>& queries, int k);

/// Exhaustive non-backtracking walk enumeration: sums the step-probability
/// products of every h-step walk per endpoint, then renormalizes the
/// surviving mass. Capped at n <= 12, h <= 4.
AgentState brute_force_walk_oracle(const NavGraph& graph, const EdgeWeights& weights,
                                   const AgentState& x_t, int h);

struct MetricValue {
  double mean = 0.0;
  double stddev = 0.0;
};

struct MetricsReport {
  std::string dataset_label;
  std::string config_label;
  int runs = 0;
  MetricValue target_probability;
  MetricValue target_probability_indicator;
  bool choice_defined = false;
  MetricValue choice_accuracy;
  MetricValue precision_top1;
  MetricValue precision_top5;
};

struct MatrixOptions {
  SplitRatios ratios{};
  std::uint64_t split_seed = 0;
  ModelConfig model{};
  TrainConfig trainer{};  // seed is overridden per run
  ChoiceDegreeMode choice_degree = ChoiceDegreeMode::OutDegree;
  std::string dataset_label = "dataset";
  const TfidfModel* tfidf = nullptr;  // optional; tfidf column zero without it
};

/// Trains one model per (feature configuration, seed) on the train split
/// and evaluates on the held-out test split; aggregates mean +/- std
/// across seeds. Byte-deterministic given (dataset, configs, seeds).
std::vector<MetricsReport> run_experiment_matrix(
    const Dataset& dataset, const std::vector<FeatureConfig>& configs,
    const std::vector<std::uint64_t>& seeds, const MatrixOptions& options);

/// Fixed-width text table: metric rows by feature-configuration columns.
std::string format_report_table(const std::vector<MetricsReport>& reports);

/// Machine-readable long form: config, metric, mean, std, runs.
std::string format_report_tsv(const std::vector<MetricsReport>& reports);

/// Directional, non-gating check: does any DHT-augmented configuration
/// beat the original edge features on precision top5?
std::optional<bool> dht_beats_original_on_top5(
    const std::vector<MetricsReport>& reports);

/// key=value manifest: dataset hash, configs, seeds, code version.
std::string format_run_manifest(std::uint64_t dataset_hash,
                                const std::vector<FeatureConfig>& configs,
                                const std::vector<std::uint64_t>& seeds,
                                const MatrixOptions& options);

}  // namespace pathx
