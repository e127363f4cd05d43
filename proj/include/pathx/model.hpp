#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pathx/features.hpp"
#include "pathx/graph.hpp"
#include "pathx/matrix.hpp"

namespace pathx {

/// Distribution over nodes. Unit sum unless degenerate (all walk mass
/// trapped); mass_retained records the pre-renormalization total.
struct AgentState {
  std::vector<double> x;
  bool degenerate = false;
  double mass_retained = 1.0;
};

AgentState one_hot_state(int num_nodes, NodeId v);

/// Per-node context vector of width 2: the current position and the
/// decay-weighted prefix history, both diffused `depth` times through the
/// self-looped, out-degree-normalized adjacency operator.
struct PseudoCoordinates {
  Matrix values;  // n x 2
  int depth = 0;
  double decay = 1.0;
};

PseudoCoordinates pseudo_coordinates(const NavGraph& graph,
                                     std::span<const NodeId> prefix, int depth,
                                     double decay);

/// Edge-scoring MLP: tanh hidden layers, scalar linear output.
struct MlpShape {
  int input_width = 0;
  std::vector<int> hidden;

  int num_params() const;
  bool operator==(const MlpShape&) const = default;
};

/// Flat parameter vector phi (layer weights row-major, then biases, per
/// layer in order).
class ModelParameters {
 public:
  ModelParameters() = default;
  ModelParameters(MlpShape shape, std::vector<double> flat);

  /// Seeded uniform init in [-0.1, 0.1].
  static ModelParameters seeded(const MlpShape& shape, std::uint64_t seed);

  const MlpShape& shape() const { return shape_; }
  std::vector<double>& flat() { return flat_; }
  const std::vector<double>& flat() const { return flat_; }

  bool operator==(const ModelParameters&) const = default;

 private:
  MlpShape shape_;
  std::vector<double> flat_;
};

/// Width of the MLP input (c_i, c_j, f_i, f_j, f_ij).
int edge_input_width(int node_feature_width, int edge_feature_width);

/// Per-edge raw scores z. Feature matrices are indexed by node/edge id and
/// must match the parameter shape's input width.
std::vector<double> edge_logits(const ModelParameters& params,
                                const PseudoCoordinates& coords,
                                const Matrix& node_features,
                                const Matrix& edge_features,
                                const NavGraph& graph);

struct EdgeWeights {
  std::vector<double> logits;
  std::vector<double> weights;  // softmax per source node's outgoing set
};

EdgeWeights normalize_weights(std::vector<double> logits, const NavGraph& graph);

enum class ProjectionMode { HeadProjection, Pseudoinverse };

/// Weight-independent structure of the edge-to-edge operator: for each
/// edge (i->j), its reverse edge (if present) and the non-backtracking
/// successor transitions (out-edges of j except j->i).
struct OperatorSkeleton {
  std::vector<EdgeId> backtrack;  // reverse edge id or kNoEdge, per edge
  std::vector<int> succ_ptr;      // m+1; transitions grouped by from-edge
  std::vector<EdgeId> succ_edge;  // transition target edge
  std::vector<int> pred_ptr;      // m+1; same transitions grouped by to-edge
  std::vector<int> pred_trans;    // transition index
  std::vector<EdgeId> pred_from;  // transition source edge

  int num_transitions() const { return static_cast<int>(succ_edge.size()); }
  static OperatorSkeleton build(const NavGraph& graph);
};

/// Edge-to-edge transition probabilities P (per skeleton transition) plus
/// the node-to-edge lift B (the per-edge weights). A row is zero and
/// flagged trapped when its only successor is the backtrack edge.
struct TransitionOperators {
  const NavGraph* graph = nullptr;
  ProjectionMode mode = ProjectionMode::HeadProjection;
  std::vector<double> weight;  // per edge (B values)
  std::vector<double> prob;    // per transition, aligned with skeleton
  std::vector<bool> trapped;   // per edge
  std::shared_ptr<const OperatorSkeleton> skeleton;
};

TransitionOperators build_operators(const EdgeWeights& weights,
                                    const NavGraph& graph, ProjectionMode mode);
TransitionOperators build_operators(const EdgeWeights& weights,
                                    const NavGraph& graph,
                                    const OperatorSkeleton& skeleton,
                                    ProjectionMode mode);

/// Dense m x m transition matrix (row = from edge). Test/debug aid.
Matrix dense_transition_matrix(const TransitionOperators& ops);

/// Walks the agent h steps. Head-projection: lift to edge mass, advance
/// h-1 transitions, scatter to edge destinations. Pseudoinverse: advance h
/// transitions and project back through the Moore-Penrose pseudoinverse of
/// the lift (exact closed form; restricted to m <= 5000), clamping
/// negatives and renormalizing. Both renormalize surviving mass to unit
/// sum; a state that lost all mass comes back flagged degenerate.
AgentState propagate(const TransitionOperators& ops, const AgentState& x_t, int h);

/// Product of non-backtracking step probabilities along the suffix. The
/// first step is conditioned on the prefix's last traversed edge when the
/// prefix has one, else it is the plain softmax weight. A suffix step with
/// no graph edge yields probability 0 (diagnostic in *diag if given).
double suffix_likelihood(const EdgeWeights& weights, const NavGraph& graph,
                         std::span<const NodeId> prefix,
                         std::span<const NodeId> suffix,
                         std::string* diag = nullptr);

/// One prediction task: observed prefix, ground-truth suffix.
struct Query {
  PathId path_id = 0;
  std::vector<NodeId> prefix;
  std::vector<NodeId> suffix;

  int horizon() const { return static_cast<int>(suffix.size()); }
  NodeId target() const { return suffix.back(); }
};

Query make_query(const Trajectory& t);
std::vector<Query> make_queries(const std::vector<Trajectory>& trajectories);

struct ModelConfig {
  int coord_depth = 3;       // K
  double coord_decay = 0.7;  // gamma
  std::vector<int> hidden = {16, 16};
  ProjectionMode mode = ProjectionMode::HeadProjection;
};

/// Feature schema carried by checkpoints; loading refuses a mismatch.
struct CheckpointSchema {
  std::vector<std::string> node_schema;
  std::vector<std::string> edge_schema;
  int coord_depth = 3;
  double coord_decay = 0.7;
  std::vector<int> hidden = {16, 16};

  bool operator==(const CheckpointSchema&) const = default;
};

/// Immutable evaluation context: graph, standardized feature matrices,
/// operator skeleton. Shared by loss, gradient, training and metrics.
class ModelContext {
 public:
  ModelContext(const NavGraph& graph, const NodeFeatureMatrix& node_features,
               const EdgeFeatureMatrix& edge_features, ModelConfig config);

  const NavGraph& graph() const { return *graph_; }
  const ModelConfig& config() const { return config_; }
  const OperatorSkeleton& skeleton() const { return skeleton_; }
  const Matrix& node_features() const { return node_std_; }
  const Matrix& edge_features() const { return edge_std_; }
  MlpShape mlp_shape() const;
  CheckpointSchema schema() const;

  EdgeWeights weights_for_prefix(const ModelParameters& params,
                                 std::span<const NodeId> prefix) const;
  AgentState predict(const ModelParameters& params, const Query& q) const;

 private:
  const NavGraph* graph_;
  ModelConfig config_;
  Matrix node_std_;
  Matrix edge_std_;
  std::vector<std::string> node_schema_;
  std::vector<std::string> edge_schema_;
  OperatorSkeleton skeleton_;
};

inline constexpr double kLikelihoodEpsilon = 1e-12;

/// Mean over the batch of -ln(x_hat . target + eps). Degenerate
/// propagation contributes -ln(eps).
double loss(const ModelParameters& params, const ModelContext& ctx,
            const std::vector<Query>& batch);

/// Exact reverse-mode gradient of `loss` with respect to every parameter.
std::vector<double> gradient(const ModelParameters& params,
                             const ModelContext& ctx,
                             const std::vector<Query>& batch);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  int patience = 20;  // early stop on validation loss
  std::uint64_t seed = 0;
  double divergence_threshold = 1e6;
};

struct TrainResult {
  ModelParameters params;  // best validation loss
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;
};

/// Full-batch gradient descent, deterministic for a fixed seed. Throws on
/// divergence (loss above the configured threshold). An empty validation
/// set falls back to the training loss for model selection.
TrainResult train(const ModelContext& ctx, const std::vector<Query>& train_set,
                  const std::vector<Query>& validation_set,
                  const TrainConfig& config);

void save_checkpoint(const std::filesystem::path& file,
                     const ModelParameters& params, const CheckpointSchema& schema);
std::pair<ModelParameters, CheckpointSchema> load_checkpoint(
    const std::filesystem::path& file);

/// Throws DimensionError when a checkpoint schema cannot drive the context.
void ensure_schema_match(const CheckpointSchema& checkpoint,
                         const CheckpointSchema& context);

}  // namespace pathx
