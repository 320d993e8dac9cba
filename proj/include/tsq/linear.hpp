#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsq/features.hpp"

namespace tsq {

enum class PenaltyKind { l1, l2 };

PenaltyKind penalty_from_string(const std::string& s);
std::string to_string(PenaltyKind p);

struct ClassifierConfig {
  PenaltyKind penalty = PenaltyKind::l2;
  double C = 1.0;      // inverse regularization strength, > 0
  double alpha = 1.0;  // count smoothing for the class ratio, > 0
  int max_iter = 1000;
  double tol = 1e-6;

  void validate() const;
};

/// One binary head: minimizes mean log-loss plus (1/(2C))*|w|_2^2 under l2 or
/// (1/C)*|w|_1 under l1. The intercept is never penalized. X comes in already
/// scaled by the class ratio; y holds 0/1 with both classes present.
struct BinaryFit {
  std::vector<double> weights;
  double bias = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
};

BinaryFit train_logistic(const SparseMatrix& X_scaled, const std::vector<int>& y,
                         const ClassifierConfig& cfg);

/// One-vs-rest ensemble over tf-idf features. Each class keeps its own
/// log-count ratio; prediction rescales the input per head.
struct LinearModel {
  std::vector<std::string> classes;
  bool multi_label = false;
  std::vector<std::vector<double>> ratios;   // per class, len n_features
  std::vector<std::vector<double>> weights;  // per class, len n_features
  std::vector<double> bias;                  // per class
  std::vector<bool> converged;               // per class

  nlohmann::json to_json() const;
  static LinearModel from_json(const nlohmann::json& j);
};

/// labels holds the label set of each document; exactly one entry per
/// document unless multi_label. Every class in the union must appear at
/// least once, with at least one document outside it.
LinearModel train_one_vs_rest(const SparseMatrix& X, const std::vector<std::vector<std::string>>& labels,
                              bool multi_label, const ClassifierConfig& cfg);

/// Dense rows x classes. Multi-class rows are softmax over the per-head
/// scores and sum to one; multi-label entries are independent sigmoids.
std::vector<std::vector<double>> predict_proba(const LinearModel& model, const SparseMatrix& X);

struct GridCell {
  PenaltyKind penalty = PenaltyKind::l2;
  double C = 1.0;
  double score = 0.0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  // Sorted by score descending; ties prefer l1 before l2, then smaller C.
  // Failed cells sink to the bottom.
  std::vector<GridCell> cells;
  LinearModel best_model;
};

/// Trains one model per (penalty, C) pair and scores it on the validation
/// split: micro-F1 of the argmax for multi-class, macro-F1 at a fixed 0.5
/// threshold for multi-label. A failing cell is recorded, not fatal, as long
/// as some cell succeeds.
GridResult grid_search(const SparseMatrix& X_train, const std::vector<std::vector<std::string>>& y_train,
                       const SparseMatrix& X_valid, const std::vector<std::vector<std::string>>& y_valid,
                       bool multi_label, const std::vector<PenaltyKind>& penalties,
                       const std::vector<double>& Cs, const ClassifierConfig& base);

struct ThresholdSet {
  std::vector<double> thresholds;  // one per label, on the 0.01..0.99 grid
  std::vector<bool> defaulted;     // true where no positive example existed
};

/// Per-label scan over {0.01, ..., 0.99} maximizing that label's F1 on the
/// validation split; a document counts as positive when proba >= threshold.
/// Ties keep the lowest threshold. Labels with no positive example get 0.50,
/// flagged.
ThresholdSet search_thresholds(const std::vector<std::vector<double>>& proba,
                               const std::vector<std::vector<int>>& y);

}  // namespace tsq
