#include "pathx/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pathx/text.hpp"

namespace pathx {

TfidfModel TfidfModel::fit(const std::vector<std::string>& documents) {
  TfidfModel model;
  const int n_docs = static_cast<int>(documents.size());

  // token -> index in first-appearance order; per-doc raw counts
  std::vector<std::map<int, int>> counts(documents.size());
  std::vector<int> df;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const std::string& tok : tokenize(documents[d])) {
      auto [it, inserted] =
          model.vocabulary_.try_emplace(tok, static_cast<int>(model.vocabulary_.size()));
      if (inserted) df.push_back(0);
      auto [cit, first_in_doc] = counts[d].try_emplace(it->second, 0);
      if (first_in_doc) df[static_cast<std::size_t>(it->second)]++;
      cit->second++;
    }
  }

  model.idf_.resize(df.size());
  for (std::size_t t = 0; t < df.size(); ++t)
    model.idf_[t] = std::log((1.0 + n_docs) / (1.0 + df[t])) + 1.0;

  model.vectors_.resize(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    auto& vec = model.vectors_[d];
    double norm_sq = 0.0;
    for (const auto& [tok, count] : counts[d]) {
      double w = static_cast<double>(count) * model.idf_[static_cast<std::size_t>(tok)];
      vec.emplace_back(tok, w);
      norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [tok, w] : vec) w *= inv;
    }
  }
  return model;
}

double TfidfModel::similarity(int doc_a, int doc_b) const {
  const auto& a = vectors_[static_cast<std::size_t>(doc_a)];
  const auto& b = vectors_[static_cast<std::size_t>(doc_b)];
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first)
      ++i;
    else if (a[i].first > b[j].first)
      ++j;
    else
      dot += a[i++].second * b[j++].second;
  }
  return std::clamp(dot, 0.0, 1.0);
}

}  // namespace pathx
