#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pathx {

/// TF-IDF over a fixed document list. tf is the raw in-document count,
/// idf = ln((1+N)/(1+df)) + 1, document vectors are L2-normalized (an
/// empty document stays the zero vector).
class TfidfModel {
 public:
  static TfidfModel fit(const std::vector<std::string>& documents);

  int num_documents() const { return static_cast<int>(vectors_.size()); }

  /// Sorted (token index, weight) pairs of the unit-normalized vector.
  const std::vector<std::pair<int, double>>& document_vector(int doc) const {
    return vectors_[static_cast<std::size_t>(doc)];
  }

  /// Cosine similarity of two fitted documents, clamped to [0, 1].
  double similarity(int doc_a, int doc_b) const;

  const std::unordered_map<std::string, int>& vocabulary() const {
    return vocabulary_;
  }
  double idf(int token) const { return idf_[static_cast<std::size_t>(token)]; }

 private:
  std::unordered_map<std::string, int> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::vector<std::pair<int, double>>> vectors_;
};

}  // namespace pathx
