#pragma once

#include <unistd.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pathx/dataset.hpp"
#include "pathx/graph.hpp"
#include "pathx/model.hpp"
#include "pathx/rng.hpp"
#include "pathx/text.hpp"

namespace testutil {

inline pathx::NavGraph random_graph(int n, int target_m, pathx::Rng& rng) {
  pathx::NavGraph g;
  for (int i = 0; i < n; ++i) g.add_node("node_" + std::to_string(i));
  int guard = 0;
  int added = 0;
  const int possible = n * (n - 1);
  while (added < std::min(target_m, possible) && ++guard < 100000) {
    auto a = static_cast<pathx::NodeId>(rng.uniform(static_cast<std::uint64_t>(n)));
    auto b = static_cast<pathx::NodeId>(rng.uniform(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    int before = g.num_edges();
    g.add_edge(a, b);
    if (g.num_edges() > before) ++added;
  }
  return g;
}

inline pathx::EdgeWeights random_weights(const pathx::NavGraph& g, pathx::Rng& rng) {
  std::vector<double> logits(static_cast<std::size_t>(g.num_edges()));
  for (double& z : logits) z = rng.uniform_real(-2.0, 2.0);
  return pathx::normalize_weights(std::move(logits), g);
}

/// Random non-revisiting walk of length >= 2, or empty when stuck.
inline std::vector<pathx::NodeId> random_walk(const pathx::NavGraph& g,
                                              pathx::Rng& rng, int max_len) {
  auto cur = static_cast<pathx::NodeId>(
      rng.uniform(static_cast<std::uint64_t>(g.num_nodes())));
  std::vector<pathx::NodeId> walk = {cur};
  while (static_cast<int>(walk.size()) < max_len) {
    std::vector<pathx::NodeId> fresh;
    for (pathx::EdgeId e : g.out_edges(cur)) {
      pathx::NodeId nxt = g.edge(e).dst;
      bool seen = false;
      for (pathx::NodeId v : walk) seen = seen || v == nxt;
      if (!seen) fresh.push_back(nxt);
    }
    if (fresh.empty()) break;
    cur = fresh[rng.uniform(fresh.size())];
    walk.push_back(cur);
  }
  if (walk.size() < 2) walk.clear();
  return walk;
}

inline pathx::Dataset random_dataset(pathx::Rng& rng, int n = 12, int m = 30,
                                     int paths = 8) {
  pathx::Dataset ds;
  ds.graph = random_graph(n, m, rng);
  pathx::PathId pid = 0;
  int guard = 0;
  while (static_cast<int>(ds.trajectories.size()) < paths && ++guard < 10000) {
    std::vector<pathx::NodeId> walk = random_walk(ds.graph, rng, 6);
    if (walk.empty()) continue;
    pathx::Trajectory t;
    t.path_id = pid++;
    t.node_ids = std::move(walk);
    pathx::apply_default_split(t);
    ds.trajectories.push_back(std::move(t));
  }
  const char* cats[] = {"Place", "Person", "subject.General"};
  for (int i = 0; i < ds.graph.num_nodes(); ++i)
    ds.categories.push_back(cats[static_cast<std::size_t>(rng.uniform(3))]);
  return ds;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pathx_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline std::map<std::string, std::string> read_dir_bytes(
    const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      out[entry.path().lexically_relative(dir).string()] =
          pathx::read_file(entry.path());
  return out;
}

inline std::filesystem::path fixture_dir() { return PATHX_FIXTURE_DIR; }

}  // namespace testutil
