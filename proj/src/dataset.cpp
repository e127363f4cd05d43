#include "pathx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pathx/rng.hpp"
#include "pathx/text.hpp"

namespace pathx {

namespace {

const char* const kDatasetFiles[] = {
    "articles.tsv", "edges.tsv",      "paths.tsv",       "lengths.tsv",
    "categories.tsv", "hyperedges.tsv", "observations.tsv"};

std::vector<std::string> load_tsv_lines(const std::filesystem::path& dir,
                                        const char* name) {
  std::filesystem::path p = dir / name;
  if (!std::filesystem::exists(p))
    throw MissingFileError("dataset file missing: " + p.string());
  return read_lines(p);
}

std::pair<std::string, std::string> two_fields(const std::string& line,
                                               const char* file) {
  auto pos = line.find('\t');
  if (pos == std::string::npos)
    throw ParseError(std::string(file) + ": expected two tab-separated fields: " + line);
  return {line.substr(0, pos), line.substr(pos + 1)};
}

std::vector<NodeId> parse_id_list(std::string_view joined, std::string_view what) {
  std::vector<NodeId> ids;
  if (joined.empty()) return ids;
  for (const std::string& f : split(joined, ','))
    ids.push_back(static_cast<NodeId>(parse_int(f, what)));
  return ids;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;

  for (const std::string& line : load_tsv_lines(dir, "articles.tsv")) {
    auto [id_f, title] = two_fields(line, "articles.tsv");
    NodeId id = static_cast<NodeId>(parse_int(id_f, "article id"));
    if (id != ds.graph.num_nodes())
      throw DanglingIdError("articles.tsv: non-contiguous id " + id_f);
    ds.graph.add_node(title);
  }
  if (ds.graph.num_nodes() == 0)
    throw ParseError("articles.tsv: dataset has no articles");

  for (const std::string& line : load_tsv_lines(dir, "edges.tsv")) {
    std::vector<std::string> f = split(line, '\t');
    if (f.size() != 3) throw ParseError("edges.tsv: expected three fields: " + line);
    EdgeId id = static_cast<EdgeId>(parse_int(f[0], "edge id"));
    NodeId src = static_cast<NodeId>(parse_int(f[1], "edge src"));
    NodeId dst = static_cast<NodeId>(parse_int(f[2], "edge dst"));
    if (src < 0 || src >= ds.graph.num_nodes() || dst < 0 || dst >= ds.graph.num_nodes())
      throw DanglingIdError("edges.tsv: edge " + f[0] + " references unknown node id");
    if (id != ds.graph.num_edges())
      throw DanglingIdError("edges.tsv: non-contiguous edge id " + f[0]);
    if (ds.graph.add_edge(src, dst) != id)
      throw ParseError("edges.tsv: duplicate edge " + f[1] + "->" + f[2]);
  }

  for (const std::string& line : load_tsv_lines(dir, "paths.tsv")) {
    auto [id_f, joined] = two_fields(line, "paths.tsv");
    Trajectory t;
    t.path_id = static_cast<PathId>(parse_int(id_f, "path id"));
    t.node_ids = parse_id_list(joined, "path node id");
    for (NodeId v : t.node_ids)
      if (v < 0 || v >= ds.graph.num_nodes())
        throw DanglingIdError("paths.tsv: path " + id_f +
                              " references unknown node id " + std::to_string(v));
    for (int i = 0; i + 1 < t.length(); ++i)
      if (ds.graph.find_edge(t.node_ids[i], t.node_ids[i + 1]) == kNoEdge)
        throw MissingEdgeError("paths.tsv: path " + id_f + " step " +
                               std::to_string(i) + " is not a graph edge");
    apply_default_split(t);
    ds.trajectories.push_back(std::move(t));
  }

  // lengths.tsv is derived data; verify it matches the paths
  {
    std::vector<std::string> lines = load_tsv_lines(dir, "lengths.tsv");
    if (lines.size() != ds.trajectories.size())
      throw ParseError("lengths.tsv: entry count does not match paths.tsv");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto [id_f, len_f] = two_fields(lines[i], "lengths.tsv");
      if (parse_int(id_f, "path id") != ds.trajectories[i].path_id ||
          parse_int(len_f, "path length") != ds.trajectories[i].length())
        throw ParseError("lengths.tsv: entry " + id_f + " disagrees with paths.tsv");
    }
  }

  ds.categories.assign(static_cast<std::size_t>(ds.graph.num_nodes()), "");
  for (const std::string& line : load_tsv_lines(dir, "categories.tsv")) {
    auto [id_f, cat] = two_fields(line, "categories.tsv");
    NodeId id = static_cast<NodeId>(parse_int(id_f, "category node id"));
    if (id < 0 || id >= ds.graph.num_nodes())
      throw DanglingIdError("categories.tsv: unknown node id " + id_f);
    ds.categories[static_cast<std::size_t>(id)] = cat;
  }

  // hyperedges.tsv: per-node incident edge ids (the dual incidence)
  {
    std::vector<std::string> lines = load_tsv_lines(dir, "hyperedges.tsv");
    if (static_cast<int>(lines.size()) != ds.graph.num_nodes())
      throw ParseError("hyperedges.tsv: entry count does not match articles.tsv");
    for (const std::string& line : lines) {
      auto [id_f, joined] = two_fields(line, "hyperedges.tsv");
      NodeId id = static_cast<NodeId>(parse_int(id_f, "hyperedge node id"));
      if (id < 0 || id >= ds.graph.num_nodes())
        throw DanglingIdError("hyperedges.tsv: unknown node id " + id_f);
      std::vector<EdgeId> listed = parse_id_list(joined, "incident edge id");
      std::vector<EdgeId> expect;
      for (EdgeId e : ds.graph.in_edges(id)) expect.push_back(e);
      for (EdgeId e : ds.graph.out_edges(id)) expect.push_back(e);
      std::sort(expect.begin(), expect.end());
      if (listed != expect)
        throw DanglingIdError("hyperedges.tsv: node " + id_f +
                              " incident edge list disagrees with edges.tsv");
    }
  }

  // observations.tsv: step:node pairs per path
  {
    std::vector<std::string> lines = load_tsv_lines(dir, "observations.tsv");
    if (lines.size() != ds.trajectories.size())
      throw ParseError("observations.tsv: entry count does not match paths.tsv");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto [id_f, joined] = two_fields(lines[i], "observations.tsv");
      const Trajectory& t = ds.trajectories[i];
      if (parse_int(id_f, "path id") != t.path_id)
        throw ParseError("observations.tsv: path order disagrees with paths.tsv");
      std::vector<std::string> pairs =
          joined.empty() ? std::vector<std::string>{} : split(joined, ',');
      if (static_cast<int>(pairs.size()) != t.length())
        throw ParseError("observations.tsv: path " + id_f + " step count mismatch");
      for (int s = 0; s < t.length(); ++s) {
        auto colon = pairs[static_cast<std::size_t>(s)].find(':');
        if (colon == std::string::npos)
          throw ParseError("observations.tsv: malformed pair in path " + id_f);
        const std::string& pair = pairs[static_cast<std::size_t>(s)];
        if (parse_int(pair.substr(0, colon), "observation step") != s ||
            parse_int(pair.substr(colon + 1), "observation node") != t.node_ids[s])
          throw DanglingIdError("observations.tsv: path " + id_f +
                                " disagrees with paths.tsv at step " + std::to_string(s));
      }
    }
  }

  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string out;

  out.clear();
  for (const ArticleNode& n : ds.graph.nodes())
    out += std::to_string(n.id) + "\t" + n.title + "\n";
  write_file(dir / "articles.tsv", out);

  out.clear();
  for (const DirectedEdge& e : ds.graph.edges())
    out += std::to_string(e.id) + "\t" + std::to_string(e.src) + "\t" +
           std::to_string(e.dst) + "\n";
  write_file(dir / "edges.tsv", out);

  std::string paths_out, lengths_out, obs_out;
  for (const Trajectory& t : ds.trajectories) {
    std::vector<std::string> ids, pairs;
    for (int s = 0; s < t.length(); ++s) {
      ids.push_back(std::to_string(t.node_ids[static_cast<std::size_t>(s)]));
      pairs.push_back(std::to_string(s) + ":" +
                      std::to_string(t.node_ids[static_cast<std::size_t>(s)]));
    }
    paths_out += std::to_string(t.path_id) + "\t" + join(ids, ',') + "\n";
    lengths_out += std::to_string(t.path_id) + "\t" + std::to_string(t.length()) + "\n";
    obs_out += std::to_string(t.path_id) + "\t" + join(pairs, ',') + "\n";
  }
  write_file(dir / "paths.tsv", paths_out);
  write_file(dir / "lengths.tsv", lengths_out);
  write_file(dir / "observations.tsv", obs_out);

  out.clear();
  for (const ArticleNode& n : ds.graph.nodes()) {
    std::string cat = static_cast<std::size_t>(n.id) < ds.categories.size()
                          ? ds.categories[static_cast<std::size_t>(n.id)]
                          : std::string();
    out += std::to_string(n.id) + "\t" + cat + "\n";
  }
  write_file(dir / "categories.tsv", out);

  out.clear();
  for (const ArticleNode& n : ds.graph.nodes()) {
    std::vector<EdgeId> incident;
    for (EdgeId e : ds.graph.in_edges(n.id)) incident.push_back(e);
    for (EdgeId e : ds.graph.out_edges(n.id)) incident.push_back(e);
    std::sort(incident.begin(), incident.end());
    std::vector<std::string> fields;
    for (EdgeId e : incident) fields.push_back(std::to_string(e));
    out += std::to_string(n.id) + "\t" + join(fields, ',') + "\n";
  }
  write_file(dir / "hyperedges.tsv", out);
}

DatasetSplit split_dataset(const std::vector<Trajectory>& trajectories,
                           const SplitRatios& ratios, std::uint64_t seed) {
  if (trajectories.empty()) throw DomainError("split of empty trajectory list");
  double sum = ratios.train + ratios.validation + ratios.test;
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw DomainError("split ratios must be positive and sum to 1");

  std::vector<std::size_t> order(trajectories.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::size_t n = trajectories.size();
  std::size_t n_train = static_cast<std::size_t>(ratios.train * static_cast<double>(n));
  std::size_t n_val =
      static_cast<std::size_t>(ratios.validation * static_cast<double>(n));
  std::size_t n_test = static_cast<std::size_t>(ratios.test * static_cast<double>(n));
  // hand the remainder to the earliest buckets
  std::size_t rem = n - (n_train + n_val + n_test);
  while (rem > 0) {
    if (rem > 0) { ++n_train; --rem; }
    if (rem > 0) { ++n_val; --rem; }
    if (rem > 0) { ++n_test; --rem; }
  }

  DatasetSplit out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_train; ++i) out.train.push_back(trajectories[order[k++]]);
  for (std::size_t i = 0; i < n_val; ++i)
    out.validation.push_back(trajectories[order[k++]]);
  for (std::size_t i = 0; i < n_test; ++i) out.test.push_back(trajectories[order[k++]]);
  return out;
}

void write_graphml(const NavGraph& graph, const std::filesystem::path& file) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  out += "  <key id=\"title\" for=\"node\" attr.name=\"title\" attr.type=\"string\"/>\n";
  out += "  <graph id=\"G\" edgedefault=\"directed\">\n";
  for (const ArticleNode& n : graph.nodes()) {
    out += "    <node id=\"n" + std::to_string(n.id) + "\"><data key=\"title\">" +
           xml_escape(n.title) + "</data></node>\n";
  }
  for (const DirectedEdge& e : graph.edges()) {
    out += "    <edge id=\"e" + std::to_string(e.id) + "\" source=\"n" +
           std::to_string(e.src) + "\" target=\"n" + std::to_string(e.dst) + "\"/>\n";
  }
  out += "  </graph>\n</graphml>\n";
  write_file(file, out);
}

Dataset load_wikispeedia_paths(const std::filesystem::path& file,
                               WikispeediaStats* stats) {
  WikispeediaStats local;
  std::vector<std::vector<std::string>> resolved;
  for (const std::string& line : read_lines(file)) {
    if (line.empty() || line[0] == '#') continue;
    ++local.lines;
    std::vector<std::string> seq;
    for (const std::string& tok : split(line, '\t')) {
      if (tok.empty()) continue;
      if (tok == "<") {
        if (seq.size() > 1) seq.pop_back();  // cannot pop the start
        continue;
      }
      seq.push_back(url_decode(tok));
    }
    if (seq.size() < 2) {
      ++local.dropped_short;
      continue;
    }
    std::unordered_set<std::string> uniq(seq.begin(), seq.end());
    if (uniq.size() != seq.size()) {
      ++local.dropped_repeats;
      continue;
    }
    resolved.push_back(std::move(seq));
  }

  Dataset ds;
  for (const auto& seq : resolved)
    for (const std::string& title : seq)
      if (ds.graph.find_title(title) == kNoNode) ds.graph.add_node(title);
  PathId pid = 0;
  for (const auto& seq : resolved) {
    Trajectory t;
    t.path_id = pid++;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      ds.graph.add_edge(ds.graph.find_title(seq[i]), ds.graph.find_title(seq[i + 1]));
    for (const std::string& title : seq) t.node_ids.push_back(ds.graph.find_title(title));
    apply_default_split(t);
    ds.trajectories.push_back(std::move(t));
  }
  local.paths_kept = static_cast<int>(ds.trajectories.size());
  ds.categories.assign(static_cast<std::size_t>(ds.graph.num_nodes()),
                       "subject.General");
  if (stats) *stats = local;
  return ds;
}

std::uint64_t dataset_fingerprint(const std::filesystem::path& dir) {
  std::uint64_t h = fnv1a64("dataset");
  for (const char* name : kDatasetFiles) {
    h = fnv1a64(name, h);
    std::filesystem::path p = dir / name;
    if (std::filesystem::exists(p)) h = fnv1a64(read_file(p), h);
  }
  return h;
}

}  // namespace pathx
