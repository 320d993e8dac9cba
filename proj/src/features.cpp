#include "tsq/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "tsq/error.hpp"

namespace tsq {

using nlohmann::json;

void VectorizerOptions::validate() const {
  if (min_df < 1) throw Error::config("min_df must be at least 1");
  if (max_df_ratio <= 0.0 || max_df_ratio > 1.0) {
    throw Error::config("max_df_ratio must lie in (0, 1]");
  }
}

namespace {

template <typename Fn>
void each_term(const std::vector<std::string>& doc, Fn&& fn) {
  for (size_t i = 0; i < doc.size(); ++i) {
    fn(doc[i]);
    if (i + 1 < doc.size()) fn(doc[i] + " " + doc[i + 1]);
  }
}

}  // namespace

Vectorizer Vectorizer::fit(const std::vector<std::vector<std::string>>& docs,
                           const VectorizerOptions& opts) {
  opts.validate();
  if (docs.empty()) throw Error::train("cannot fit a vectorizer on an empty corpus");

  // Document frequencies. std::map keeps terms sorted as a side effect.
  std::map<std::string, size_t> df;
  for (const auto& doc : docs) {
    std::unordered_map<std::string, bool> seen;
    each_term(doc, [&](const std::string& term) { seen.emplace(term, true); });
    for (const auto& [term, _] : seen) ++df[term];
  }

  const double n = static_cast<double>(docs.size());
  Vectorizer v;
  v.opts_ = opts;
  for (const auto& [term, count] : df) {
    if (count < opts.min_df) continue;
    if (static_cast<double>(count) > opts.max_df_ratio * n) continue;
    v.vocab_.push_back(term);
    v.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (v.vocab_.empty()) {
    throw Error::train("vectorizer: no term satisfies the document-frequency bounds");
  }
  return v;
}

SparseMatrix Vectorizer::transform(const std::vector<std::vector<std::string>>& docs) const {
  std::unordered_map<std::string, uint32_t> index;
  index.reserve(vocab_.size());
  for (uint32_t j = 0; j < vocab_.size(); ++j) index.emplace(vocab_[j], j);

  SparseMatrix X;
  X.n_cols = vocab_.size();
  X.rows.reserve(docs.size());
  for (const auto& doc : docs) {
    std::map<uint32_t, double> counts;
    each_term(doc, [&](const std::string& term) {
      auto it = index.find(term);
      if (it != index.end()) counts[it->second] += 1.0;
    });
    std::vector<std::pair<uint32_t, double>> row;
    row.reserve(counts.size());
    double sq = 0.0;
    for (const auto& [col, tf] : counts) {
      const double val = tf * idf_[col];
      row.emplace_back(col, val);
      sq += val * val;
    }
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& [col, val] : row) val *= inv;
    }
    X.rows.push_back(std::move(row));
  }
  return X;
}

json Vectorizer::to_json() const {
  json j;
  j["vocabulary"] = vocab_;
  j["idf"] = idf_;
  j["min_df"] = opts_.min_df;
  j["max_df_ratio"] = opts_.max_df_ratio;
  return j;
}

Vectorizer Vectorizer::from_json(const json& j) {
  Vectorizer v;
  v.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
  v.idf_ = j.at("idf").get<std::vector<double>>();
  v.opts_.min_df = j.at("min_df").get<size_t>();
  v.opts_.max_df_ratio = j.at("max_df_ratio").get<double>();
  if (v.vocab_.size() != v.idf_.size()) {
    throw Error::parse("vectorizer payload: vocabulary and idf lengths differ");
  }
  return v;
}

std::vector<double> nb_ratio(const SparseMatrix& X, const std::vector<int>& y, double alpha) {
  if (X.n_rows() != y.size()) throw Error::shape("nb_ratio: row count does not match y");
  if (alpha <= 0.0) throw Error::config("nb_ratio: alpha must be positive");
  size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error::invalid("nb_ratio: y entries must be 0 or 1");
    pos += static_cast<size_t>(v);
  }
  if (pos == 0 || pos == y.size()) {
    throw Error::train("nb_ratio: both classes must be present");
  }

  std::vector<double> p(X.n_cols, alpha), q(X.n_cols, alpha);
  for (size_t i = 0; i < X.rows.size(); ++i) {
    auto& dst = y[i] == 1 ? p : q;
    for (const auto& [col, val] : X.rows[i]) dst[col] += val;
  }
  double p_norm = 0.0, q_norm = 0.0;
  for (double v : p) p_norm += std::abs(v);
  for (double v : q) q_norm += std::abs(v);

  std::vector<double> r(X.n_cols);
  for (size_t j = 0; j < X.n_cols; ++j) {
    r[j] = std::log((p[j] / p_norm) / (q[j] / q_norm));
  }
  return r;
}

SparseMatrix scale_by_ratio(const SparseMatrix& X, const std::vector<double>& r) {
  if (X.n_cols != r.size()) throw Error::shape("scale_by_ratio: ratio length mismatch");
  SparseMatrix out = X;
  for (auto& row : out.rows) {
    for (auto& [col, val] : row) val *= r[col];
  }
  return out;
}

}  // namespace tsq
