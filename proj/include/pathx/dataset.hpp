#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pathx/graph.hpp"

namespace pathx {

/// A graph plus its observed trajectories and per-node categories.
struct Dataset {
  NavGraph graph;
  std::vector<Trajectory> trajectories;
  std::vector<std::string> categories;  // indexed by node id
};

/// Reads the dataset file set from a directory:
///   articles.tsv      id \t title
///   edges.tsv         edge_id \t src_id \t dst_id
///   paths.tsv         path_id \t comma-joined node ids
///   lengths.tsv       path_id \t length
///   categories.tsv    id \t category
///   hyperedges.tsv    node_id \t comma-joined incident edge ids
///   observations.tsv  path_id \t comma-joined step:node_id pairs
/// All TSV, UTF-8, LF, no header. Cross-validates every path step against
/// the edge list and the derived files against the graph.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the same file set, byte-deterministically. load then save is the
/// identity on the directory bytes.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> validation;
  std::vector<Trajectory> test;
};

/// Seeded-shuffle partition. Ratios must be positive and sum to 1; the
/// partition is exact (sizes differ from N*ratio by at most 1, remainders
/// assigned to the earliest buckets).
DatasetSplit split_dataset(const std::vector<Trajectory>& trajectories,
                           const SplitRatios& ratios, std::uint64_t seed);

/// GraphML export with a `title` data key per node.
void write_graphml(const NavGraph& graph, const std::filesystem::path& file);

struct WikispeediaStats {
  int lines = 0;
  int paths_kept = 0;
  int dropped_short = 0;
  int dropped_repeats = 0;
};

/// Loads tab-separated paths of URL-encoded titles; a `<` token is a
/// back-click and pops the previous node before graph and trajectory
/// construction. Resolved paths shorter than 2 nodes or containing repeats
/// are dropped (counted in stats).
Dataset load_wikispeedia_paths(const std::filesystem::path& file,
                               WikispeediaStats* stats = nullptr);

/// FNV-1a fingerprint over the dataset file set, for run manifests.
std::uint64_t dataset_fingerprint(const std::filesystem::path& dir);

}  // namespace pathx
