#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathx/graph.hpp"
#include "pathx/matrix.hpp"
#include "pathx/tfidf.hpp"

namespace pathx {

struct NodeFeatureMatrix {
  Matrix values;                     // n x 2
  std::vector<std::string> schema;   // {"in_deg", "out_deg"}
};

struct EdgeFeatureMatrix {
  Matrix values;                     // m x d'
  std::vector<std::string> schema;   // column names, stable contract
};

/// Row i = (in-degree, out-degree) of node i.
NodeFeatureMatrix node_degree_features(const NavGraph& graph);

/// Number-of-follows: per-edge traversal count over the given trajectories
/// (training split only, by contract). A step without a matching edge
/// raises MissingEdgeError.
std::vector<std::int64_t> nof_counts(const NavGraph& graph,
                                     const std::vector<Trajectory>& train);

/// Per-edge cosine similarity of the endpoint articles' TF-IDF vectors.
/// The model must be fitted over documents indexed by node id.
std::vector<double> tfidf_edge_similarity(const NavGraph& graph,
                                          const TfidfModel& model);

/// A (node features, incidence, edge features) triple; also the dual
/// hypergraph after the role swap.
struct GraphTriple {
  Matrix node_features;   // n x d
  SparseMatrix incidence; // n x m
  Matrix edge_features;   // m x d'
};

/// Dual hypergraph transformation (F, M, E) -> (E, M^T, F). An involution:
/// applying it twice returns the input exactly.
GraphTriple dht(const GraphTriple& g);

/// Per edge (v, u): cosine of the undirected incidence rows of v and u.
/// Always in [0, 1]; 0 by convention if either row is empty.
std::vector<double> similarity_hyperedge(const NavGraph& graph);

/// Per edge, the dual node's (in, out) degree normalized by the global
/// maximum observed dual degree. A dual node e gains one out-degree per
/// walk e -> e_j through its destination and one in-degree per walk
/// e_i -> e through its source. All zeros when no through-path exists.
std::vector<std::pair<double, double>> dhnode_in_out_degree(const NavGraph& graph);

/// Column layout: (tfidf, nof) ++ sim_hyperedge ++ (dh_in, dh_out), in that
/// fixed order for the selected features. Widths 2/3/4/5.
EdgeFeatureMatrix assemble_edge_features(
    const std::vector<double>& tfidf, const std::vector<std::int64_t>& nof,
    const std::vector<double>* sim,
    const std::vector<std::pair<double, double>>* dh);

enum class FeatureConfig { Original, SimHyperedge, DhNode, Both };

FeatureConfig parse_feature_config(std::string_view name);
std::string feature_config_name(FeatureConfig c);   // flag value
std::string feature_config_label(FeatureConfig c);  // report column label

/// Convenience: nof + tfidf (zeros if no model) + the configured DHT
/// features for one graph.
EdgeFeatureMatrix compute_edge_features(const NavGraph& graph,
                                        const std::vector<Trajectory>& train,
                                        const TfidfModel* tfidf_model,
                                        FeatureConfig config);

/// Zero mean, unit variance per column, in place. Constant columns are
/// centered only.
void standardize_columns(Matrix& m);

void write_feature_tsv(const std::filesystem::path& file,
                       const std::string& id_column,
                       const std::vector<std::string>& schema, const Matrix& values);

std::pair<std::vector<std::string>, Matrix> read_feature_tsv(
    const std::filesystem::path& file);

}  // namespace pathx
