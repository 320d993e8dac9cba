#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tsq {

/// Row-major sparse matrix; every row keeps (column, value) pairs sorted by
/// column.
struct SparseMatrix {
  size_t n_cols = 0;
  std::vector<std::vector<std::pair<uint32_t, double>>> rows;

  size_t n_rows() const { return rows.size(); }
};

struct VectorizerOptions {
  size_t min_df = 3;
  double max_df_ratio = 0.90;

  void validate() const;
};

/// Uni- and bigram tf-idf over token documents. Bigram terms are the two
/// tokens joined by one space. Terms seen in fewer than min_df documents, or
/// in more than max_df_ratio of them, are dropped. The vocabulary is sorted
/// lexicographically so fitting is order-independent and reproducible.
class Vectorizer {
public:
  static Vectorizer fit(const std::vector<std::vector<std::string>>& docs,
                        const VectorizerOptions& opts = {});

  /// Raw term counts times idf, each row L2-normalized. Unknown terms are
  /// ignored; a document with no known terms stays an all-zero row.
  SparseMatrix transform(const std::vector<std::vector<std::string>>& docs) const;

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const std::vector<double>& idf() const { return idf_; }
  const VectorizerOptions& options() const { return opts_; }

  nlohmann::json to_json() const;
  static Vectorizer from_json(const nlohmann::json& j);

private:
  std::vector<std::string> vocab_;
  std::vector<double> idf_;
  VectorizerOptions opts_;
};

/// Per-feature log-count ratio between the positive and negative class:
/// r_j = ln((p_j/|p|_1) / (q_j/|q|_1)) with p = alpha + sum of positive rows
/// and q = alpha + sum of negative rows. y holds 0/1; both classes must be
/// present and alpha must be positive.
std::vector<double> nb_ratio(const SparseMatrix& X, const std::vector<int>& y,
                             double alpha = 1.0);

/// Multiply every stored entry by the ratio of its column.
SparseMatrix scale_by_ratio(const SparseMatrix& X, const std::vector<double>& r);

}  // namespace tsq
