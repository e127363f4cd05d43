#include "pathx/features.hpp"

#include <algorithm>
#include <cmath>

#include "pathx/text.hpp"

namespace pathx {

NodeFeatureMatrix node_degree_features(const NavGraph& graph) {
  NodeFeatureMatrix out;
  out.schema = {"in_deg", "out_deg"};
  out.values = Matrix(graph.num_nodes(), 2);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    out.values(v, 0) = graph.in_degree(v);
    out.values(v, 1) = graph.out_degree(v);
  }
  return out;
}

std::vector<std::int64_t> nof_counts(const NavGraph& graph,
                                     const std::vector<Trajectory>& train) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(graph.num_edges()), 0);
  for (const Trajectory& t : train) {
    for (int i = 0; i + 1 < t.length(); ++i) {
      EdgeId e = graph.find_edge(t.node_ids[static_cast<std::size_t>(i)],
                                 t.node_ids[static_cast<std::size_t>(i) + 1]);
      if (e == kNoEdge)
        throw MissingEdgeError("nof: trajectory " + std::to_string(t.path_id) +
                               " step " + std::to_string(i) + " is not a graph edge");
      counts[static_cast<std::size_t>(e)]++;
    }
  }
  return counts;
}

std::vector<double> tfidf_edge_similarity(const NavGraph& graph,
                                          const TfidfModel& model) {
  if (model.num_documents() != graph.num_nodes())
    throw DimensionError("tfidf model documents do not match graph nodes");
  const int m = graph.num_edges();
  std::vector<double> sim(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < m; ++e) {
    const DirectedEdge& edge = graph.edge(e);
    sim[static_cast<std::size_t>(e)] = model.similarity(edge.src, edge.dst);
  }
  return sim;
}

GraphTriple dht(const GraphTriple& g) {
  if (g.node_features.rows() != g.incidence.rows)
    throw DimensionError("dht: node feature rows do not match incidence rows");
  if (g.edge_features.rows() != g.incidence.cols)
    throw DimensionError("dht: edge feature rows do not match incidence columns");
  return {g.edge_features, g.incidence.transposed(), g.node_features};
}

std::vector<double> similarity_hyperedge(const NavGraph& graph) {
  const int m = graph.num_edges();
  std::vector<double> sim(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < m; ++e) {
    const DirectedEdge& edge = graph.edge(e);
    // undirected incidence rows are 0/1; the only columns shared by the two
    // endpoint rows are this edge and its reverse
    double common = 1.0 + (graph.find_edge(edge.dst, edge.src) != kNoEdge ? 1.0 : 0.0);
    double deg_v = graph.in_degree(edge.src) + graph.out_degree(edge.src);
    double deg_u = graph.in_degree(edge.dst) + graph.out_degree(edge.dst);
    double denom_sq = deg_v * deg_u;
    sim[static_cast<std::size_t>(e)] =
        denom_sq > 0.0 ? common / std::sqrt(denom_sq) : 0.0;
  }
  return sim;
}

std::vector<std::pair<double, double>> dhnode_in_out_degree(const NavGraph& graph) {
  const int m = graph.num_edges();
  std::vector<std::int64_t> raw_in(static_cast<std::size_t>(m), 0);
  std::vector<std::int64_t> raw_out(static_cast<std::size_t>(m), 0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < m; ++e) {
    const DirectedEdge& edge = graph.edge(e);
    // one through-pair per (in-edge of src, this) and (this, out-edge of dst)
    raw_in[static_cast<std::size_t>(e)] = graph.in_degree(edge.src);
    raw_out[static_cast<std::size_t>(e)] = graph.out_degree(edge.dst);
  }
  std::int64_t d_max = 0;
  for (int e = 0; e < m; ++e)
    d_max = std::max({d_max, raw_in[static_cast<std::size_t>(e)],
                      raw_out[static_cast<std::size_t>(e)]});
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(m), {0.0, 0.0});
  if (d_max == 0) return out;  // no through-path anywhere
#pragma omp parallel for schedule(static)
  for (int e = 0; e < m; ++e) {
    out[static_cast<std::size_t>(e)] = {
        static_cast<double>(raw_in[static_cast<std::size_t>(e)]) /
            static_cast<double>(d_max),
        static_cast<double>(raw_out[static_cast<std::size_t>(e)]) /
            static_cast<double>(d_max)};
  }
  return out;
}

EdgeFeatureMatrix assemble_edge_features(
    const std::vector<double>& tfidf, const std::vector<std::int64_t>& nof,
    const std::vector<double>* sim,
    const std::vector<std::pair<double, double>>* dh) {
  const std::size_t m = tfidf.size();
  if (nof.size() != m || (sim && sim->size() != m) || (dh && dh->size() != m))
    throw DimensionError("edge feature inputs disagree on edge count");

  std::vector<std::string> schema = {"tfidf", "nof"};
  if (sim) schema.push_back("sim_hyperedge");
  if (dh) {
    schema.push_back("dh_in");
    schema.push_back("dh_out");
  }

  EdgeFeatureMatrix out;
  out.schema = schema;
  out.values = Matrix(static_cast<int>(m), static_cast<int>(schema.size()));
  for (std::size_t e = 0; e < m; ++e) {
    int c = 0;
    out.values(static_cast<int>(e), c++) = tfidf[e];
    out.values(static_cast<int>(e), c++) = static_cast<double>(nof[e]);
    if (sim) out.values(static_cast<int>(e), c++) = (*sim)[e];
    if (dh) {
      out.values(static_cast<int>(e), c++) = (*dh)[e].first;
      out.values(static_cast<int>(e), c++) = (*dh)[e].second;
    }
  }
  return out;
}

FeatureConfig parse_feature_config(std::string_view name) {
  if (name == "original") return FeatureConfig::Original;
  if (name == "sim") return FeatureConfig::SimHyperedge;
  if (name == "dhnode") return FeatureConfig::DhNode;
  if (name == "both") return FeatureConfig::Both;
  throw DomainError("unknown feature configuration: " + std::string(name));
}

std::string feature_config_name(FeatureConfig c) {
  switch (c) {
    case FeatureConfig::Original: return "original";
    case FeatureConfig::SimHyperedge: return "sim";
    case FeatureConfig::DhNode: return "dhnode";
    case FeatureConfig::Both: return "both";
  }
  return "original";
}

std::string feature_config_label(FeatureConfig c) {
  switch (c) {
    case FeatureConfig::Original: return "Original Edges";
    case FeatureConfig::SimHyperedge: return "Similarity-Hyperedge";
    case FeatureConfig::DhNode: return "DHnode-In-Out-Degree";
    case FeatureConfig::Both: return "Similarity-Hyperedge-DHnode-In-Out-Degree";
  }
  return "Original Edges";
}

EdgeFeatureMatrix compute_edge_features(const NavGraph& graph,
                                        const std::vector<Trajectory>& train,
                                        const TfidfModel* tfidf_model,
                                        FeatureConfig config) {
  std::vector<double> tfidf(static_cast<std::size_t>(graph.num_edges()), 0.0);
  if (tfidf_model) tfidf = tfidf_edge_similarity(graph, *tfidf_model);
  std::vector<std::int64_t> nof = nof_counts(graph, train);

  std::vector<double> sim;
  std::vector<std::pair<double, double>> dh;
  bool want_sim =
      config == FeatureConfig::SimHyperedge || config == FeatureConfig::Both;
  bool want_dh = config == FeatureConfig::DhNode || config == FeatureConfig::Both;
  if (want_sim) sim = similarity_hyperedge(graph);
  if (want_dh) dh = dhnode_in_out_degree(graph);
  return assemble_edge_features(tfidf, nof, want_sim ? &sim : nullptr,
                                want_dh ? &dh : nullptr);
}

void standardize_columns(Matrix& m) {
  for (int c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (int r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= m.rows() > 0 ? m.rows() : 1;
    double var = 0.0;
    for (int r = 0; r < m.rows(); ++r) {
      double d = m(r, c) - mean;
      var += d * d;
    }
    var /= m.rows() > 0 ? m.rows() : 1;
    double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (int r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) * scale;
  }
}

void write_feature_tsv(const std::filesystem::path& file,
                       const std::string& id_column,
                       const std::vector<std::string>& schema, const Matrix& values) {
  if (static_cast<int>(schema.size()) != values.cols())
    throw DimensionError("feature schema does not match column count");
  std::string out = id_column;
  for (const std::string& name : schema) out += "\t" + name;
  out += "\n";
  char buf[64];
  for (int r = 0; r < values.rows(); ++r) {
    out += std::to_string(r);
    for (int c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      out += "\t";
      out += buf;
    }
    out += "\n";
  }
  write_file(file, out);
}

std::pair<std::vector<std::string>, Matrix> read_feature_tsv(
    const std::filesystem::path& file) {
  std::vector<std::string> lines = read_lines(file);
  if (lines.empty()) throw ParseError("feature file is empty: " + file.string());
  std::vector<std::string> header = split(lines[0], '\t');
  if (header.size() < 2) throw ParseError("feature file header too short");
  std::vector<std::string> schema(header.begin() + 1, header.end());

  Matrix values(static_cast<int>(lines.size()) - 1, static_cast<int>(schema.size()));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = split(lines[i], '\t');
    if (fields.size() != header.size())
      throw ParseError("feature row width mismatch at line " + std::to_string(i + 1));
    if (parse_int(fields[0], "feature row id") != static_cast<std::int64_t>(i) - 1)
      throw ParseError("feature rows must be ordered by id");
    for (std::size_t c = 1; c < fields.size(); ++c) {
      errno = 0;
      char* end = nullptr;
      double v = std::strtod(fields[c].c_str(), &end);
      if (end != fields[c].c_str() + fields[c].size())
        throw ParseError("bad feature value '" + fields[c] + "'");
      values(static_cast<int>(i) - 1, static_cast<int>(c) - 1) = v;
    }
  }
  return {schema, values};
}

}  // namespace pathx
