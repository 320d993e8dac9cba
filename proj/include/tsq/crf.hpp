#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsq/corpus.hpp"

namespace tsq {

struct CrfConfig {
  double c1 = 0.0;  // l1 coefficient, >= 0
  double c2 = 0.0;  // l2 coefficient, >= 0
  int max_iter = 500;
  double tol = 1e-5;
  int window = 3;
  std::string pad_token = "xxpad";
  int feature_min_count = 1;

  void validate() const;
};

/// Features observed at position t: every unigram, bigram and trigram of
/// tokens that fits inside the window [t-window, t+window] (out-of-range
/// positions read as pad_token), plus a constant bias. With the default
/// window of 3 that is 7 + 6 + 5 + 1 = 19 strings per position.
std::vector<std::string> extract_features(const std::vector<std::string>& tokens, size_t t,
                                          int window = 3, const std::string& pad = "xxpad");

/// Linear-chain model: per-(feature, label) state weights plus a dense
/// label-transition matrix. Path score = sum of state weights of the active
/// features at each position under its label, plus the transition weight of
/// every consecutive label pair.
struct CrfModel {
  std::vector<std::string> labels;         // index is the label id
  std::vector<std::string> feature_names;  // index is the feature id
  std::vector<double> state_w;             // [feature * n_labels + label]
  std::vector<double> trans_w;             // [prev * n_labels + next]
  CrfConfig config;

  const std::unordered_map<std::string, int32_t>& feature_ids() const;
  nlohmann::json to_json() const;
  static CrfModel from_json(const nlohmann::json& j);

private:
  mutable std::unordered_map<std::string, int32_t> index_;
};

/// Log of the summed exponentiated scores over all label paths. Empty input
/// gives 0 (one empty path).
double log_partition(const CrfModel& model, const std::vector<std::string>& tokens);

/// Highest-scoring label path; ties resolve to the lowest label index.
std::vector<std::string> viterbi(const CrfModel& model, const std::vector<std::string>& tokens);

/// Gradient of the penalized log-likelihood over the batch, in the layout
/// [state weights..., transition weights...]: observed counts minus expected
/// counts minus c1*sign(w) minus 2*c2*w. Sequences must carry gold tags known
/// to the model.
std::vector<double> crf_gradient(const CrfModel& model, const std::vector<TaggedSeq>& batch);

/// Penalized log-likelihood of the batch under the model (the quantity
/// crf_gradient differentiates).
double crf_objective(const CrfModel& model, const std::vector<TaggedSeq>& batch);

struct CrfTrainResult {
  CrfModel model;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;  // penalized log-likelihood at exit
};

/// Maximizes sum log-likelihood minus c1*|w|_1 minus 2-norm penalty c2*|w|_2^2.
/// Empty sequences are skipped with a warning on stderr.
CrfTrainResult train_crf(const std::vector<TaggedSeq>& data, const CrfConfig& cfg);

}  // namespace tsq
