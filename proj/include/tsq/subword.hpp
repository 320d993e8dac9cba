#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tsq {

struct SubwordSpecials {
  std::string unk = "<unk>";
  std::string space = "<_>";
  std::string mask = "<mask>";
  std::string pad = "<pad>";
};

struct SubwordOptions {
  size_t target_vocab = 0;   // required, at least the alphabet size
  size_t max_piece_len = 8;  // in scalar values
  size_t seed_multiplier = 4;
  double prune_fraction = 0.25;
  int em_iters_per_round = 2;

  void validate() const;
};

struct SubwordModel {
  // Sorted by piece string; log-probabilities over the pieces sum to one in
  // probability space. Every scalar value seen in training has a piece, and
  // those single-character pieces are never pruned away.
  std::vector<std::pair<std::string, double>> pieces;
  SubwordSpecials special;

  /// Index into pieces, or -1 for unknown.
  int piece_id(const std::string& piece) const;
  /// Score used for characters outside the vocabulary.
  double unk_logprob() const;

  nlohmann::json to_json() const;
  static SubwordModel from_json(const nlohmann::json& j);
};

/// EM training of a unigram piece model. Seeds with every substring up to
/// max_piece_len ranked by frequency times length (capped at seed_multiplier
/// times the target), plus all single characters; alternates a fixed number
/// of E/M rounds with pruning the lowest-value multi-character pieces until
/// at most target_vocab pieces remain. When ll_trace is given, it receives
/// the corpus log-likelihood of every E step, which never decreases between
/// prunes.
SubwordModel train_unigram(const std::vector<std::string>& corpus, const SubwordOptions& opts,
                           std::vector<double>* ll_trace = nullptr);

struct SubwordPiece {
  std::string surface;
  bool unknown = false;
};

/// Viterbi segmentation into model pieces. Characters outside the vocabulary
/// come back one per piece, flagged unknown but with their surface intact, so
/// concatenating the surfaces always reproduces the input.
std::vector<SubwordPiece> encode_unigram(const SubwordModel& model, const std::string& text);

}  // namespace tsq
