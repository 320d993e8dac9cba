#include "tsq/subword.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "tsq/error.hpp"
#include "tsq/unicode.hpp"

namespace tsq {

using nlohmann::json;

void SubwordOptions::validate() const {
  if (target_vocab == 0) throw Error::config("target_vocab must be positive");
  if (max_piece_len < 1) throw Error::config("max_piece_len must be positive");
  if (seed_multiplier < 1) throw Error::config("seed_multiplier must be positive");
  if (prune_fraction <= 0.0 || prune_fraction >= 1.0) {
    throw Error::config("prune_fraction must lie in (0, 1)");
  }
  if (em_iters_per_round < 1) throw Error::config("em_iters_per_round must be positive");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Pieces never drop to probability zero: an exact zero on a single-character
// piece can strand a sentence once the multi-character pieces covering it are
// pruned, and it turns every decomposition price into an infinity.
constexpr double kProbFloor = 1e-100;

// Working vocabulary during training.
struct Working {
  std::vector<std::u32string> pieces;
  std::vector<double> prob;  // normalized
  std::unordered_map<std::u32string, size_t> index;

  void rebuild_index() {
    index.clear();
    index.reserve(pieces.size());
    for (size_t i = 0; i < pieces.size(); ++i) index.emplace(pieces[i], i);
  }
};

// One E step over the corpus: fills expected piece counts and returns the
// total log-likelihood under the current probabilities.
double e_step(const Working& w, const std::vector<std::u32string>& corpus, size_t max_len,
              std::vector<double>& counts) {
  counts.assign(w.pieces.size(), 0.0);
  std::vector<double> logp(w.pieces.size());
  for (size_t i = 0; i < w.pieces.size(); ++i) {
    logp[i] = w.prob[i] > 0.0 ? std::log(w.prob[i]) : kNegInf;
  }

  double ll = 0.0;
  std::vector<double> alpha, beta;
  // Piece ids matching s[i..j); -1 when absent.
  std::vector<std::vector<int64_t>> edge;
  for (const auto& s : corpus) {
    const size_t n = s.size();
    if (n == 0) continue;
    edge.assign(n, {});
    for (size_t i = 0; i < n; ++i) {
      edge[i].assign(std::min(max_len, n - i), -1);
      for (size_t len = 1; len <= std::min(max_len, n - i); ++len) {
        const auto it = w.index.find(s.substr(i, len));
        if (it != w.index.end()) edge[i][len - 1] = static_cast<int64_t>(it->second);
      }
    }

    alpha.assign(n + 1, kNegInf);
    beta.assign(n + 1, kNegInf);
    alpha[0] = 0.0;
    for (size_t j = 1; j <= n; ++j) {
      double m = kNegInf;
      for (size_t len = 1; len <= std::min(max_len, j); ++len) {
        const int64_t id = edge[j - len][len - 1];
        if (id >= 0) m = std::max(m, alpha[j - len] + logp[static_cast<size_t>(id)]);
      }
      if (m == kNegInf) continue;
      double sum = 0.0;
      for (size_t len = 1; len <= std::min(max_len, j); ++len) {
        const int64_t id = edge[j - len][len - 1];
        if (id >= 0) sum += std::exp(alpha[j - len] + logp[static_cast<size_t>(id)] - m);
      }
      alpha[j] = m + std::log(sum);
    }
    beta[n] = 0.0;
    for (size_t i = n; i-- > 0;) {
      double m = kNegInf;
      for (size_t len = 1; len <= std::min(max_len, n - i); ++len) {
        const int64_t id = edge[i][len - 1];
        if (id >= 0) m = std::max(m, logp[static_cast<size_t>(id)] + beta[i + len]);
      }
      if (m == kNegInf) continue;
      double sum = 0.0;
      for (size_t len = 1; len <= std::min(max_len, n - i); ++len) {
        const int64_t id = edge[i][len - 1];
        if (id >= 0) sum += std::exp(logp[static_cast<size_t>(id)] + beta[i + len] - m);
      }
      beta[i] = m + std::log(sum);
    }

    const double log_z = alpha[n];
    if (log_z == kNegInf) {
      throw Error::train("subword EM: sentence has no segmentation under the current vocabulary");
    }
    ll += log_z;
    for (size_t i = 0; i < n; ++i) {
      if (alpha[i] == kNegInf) continue;
      for (size_t len = 1; len <= std::min(max_len, n - i); ++len) {
        const int64_t id = edge[i][len - 1];
        if (id < 0 || beta[i + len] == kNegInf) continue;
        counts[static_cast<size_t>(id)] +=
            std::exp(alpha[i] + logp[static_cast<size_t>(id)] + beta[i + len] - log_z);
      }
    }
  }
  return ll;
}

// Best log-probability of splitting `piece` into other vocabulary pieces,
// excluding the piece itself. Used to price pruning decisions.
double best_alternative(const Working& w, const std::u32string& piece, size_t max_len) {
  const size_t n = piece.size();
  std::vector<double> best(n + 1, kNegInf);
  best[0] = 0.0;
  for (size_t j = 1; j <= n; ++j) {
    for (size_t len = 1; len <= std::min(max_len, j); ++len) {
      if (len == n) continue;  // the piece itself
      if (best[j - len] == kNegInf) continue;
      const auto it = w.index.find(piece.substr(j - len, len));
      if (it == w.index.end() || w.prob[it->second] <= 0.0) continue;
      best[j] = std::max(best[j], best[j - len] + std::log(w.prob[it->second]));
    }
  }
  return best[n];
}

}  // namespace

SubwordModel train_unigram(const std::vector<std::string>& corpus, const SubwordOptions& opts,
                           std::vector<double>* ll_trace) {
  opts.validate();
  std::vector<std::u32string> sents;
  sents.reserve(corpus.size());
  size_t total_chars = 0;
  for (const auto& s : corpus) {
    sents.push_back(decode_utf8(s));
    total_chars += sents.back().size();
  }
  if (total_chars == 0) throw Error::train("train_unigram: empty corpus");

  // Seed: substrings scored by frequency times length. std::map gives a
  // deterministic tie order (lexicographic).
  std::map<std::u32string, size_t> freq;
  std::set<char32_t> alphabet;
  for (const auto& s : sents) {
    for (size_t i = 0; i < s.size(); ++i) {
      alphabet.insert(s[i]);
      for (size_t len = 1; len <= std::min(opts.max_piece_len, s.size() - i); ++len) {
        ++freq[s.substr(i, len)];
      }
    }
  }
  if (opts.target_vocab < alphabet.size()) {
    throw Error::config("target_vocab (" + std::to_string(opts.target_vocab) +
                        ") is smaller than the alphabet (" + std::to_string(alphabet.size()) + ")");
  }

  std::vector<std::pair<const std::u32string*, double>> scored;
  scored.reserve(freq.size());
  for (const auto& [piece, count] : freq) {
    scored.emplace_back(&piece, static_cast<double>(count) * static_cast<double>(piece.size()));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  const size_t cap = opts.seed_multiplier * opts.target_vocab;
  Working w;
  std::set<std::u32string> chosen;
  for (const auto& [piece, score] : scored) {
    if (chosen.size() >= cap) break;
    chosen.insert(*piece);
  }
  for (char32_t c : alphabet) chosen.insert(std::u32string(1, c));

  double score_sum = 0.0;
  for (const auto& piece : chosen) {
    w.pieces.push_back(piece);
    const double score = static_cast<double>(freq[piece]) * static_cast<double>(piece.size());
    w.prob.push_back(score);
    score_sum += score;
  }
  for (double& p : w.prob) p /= score_sum;
  w.rebuild_index();

  std::vector<double> counts;
  auto run_em = [&] {
    for (int it = 0; it < opts.em_iters_per_round; ++it) {
      const double ll = e_step(w, sents, opts.max_piece_len, counts);
      if (ll_trace) ll_trace->push_back(ll);
      double total = 0.0;
      for (double c : counts) total += c;
      for (size_t i = 0; i < w.prob.size(); ++i) {
        w.prob[i] = std::max(counts[i] / total, kProbFloor);
      }
    }
  };

  while (w.pieces.size() > opts.target_vocab) {
    run_em();

    // Price every multi-character piece by the likelihood lost if its mass
    // had to flow through its best decomposition.
    std::vector<std::pair<double, size_t>> loss;
    for (size_t i = 0; i < w.pieces.size(); ++i) {
      if (w.pieces[i].size() < 2) continue;
      const double lp = w.prob[i] > 0.0 ? std::log(w.prob[i]) : kNegInf;
      double value;
      if (counts[i] <= 0.0 || lp == kNegInf) {
        value = 0.0;
      } else {
        const double alt = best_alternative(w, w.pieces[i], opts.max_piece_len);
        value = counts[i] * (lp - alt);  // alt may be -inf; then the piece is priceless
      }
      loss.emplace_back(value, i);
    }
    if (loss.empty()) break;
    const size_t over = w.pieces.size() - opts.target_vocab;
    size_t n_prune = std::max<size_t>(
        1, static_cast<size_t>(opts.prune_fraction * static_cast<double>(loss.size())));
    n_prune = std::min({n_prune, over, loss.size()});
    std::stable_sort(loss.begin(), loss.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::set<size_t> drop;
    for (size_t k = 0; k < n_prune; ++k) drop.insert(loss[k].second);
    Working next;
    for (size_t i = 0; i < w.pieces.size(); ++i) {
      if (drop.count(i)) continue;
      next.pieces.push_back(std::move(w.pieces[i]));
      next.prob.push_back(w.prob[i]);
    }
    double kept = 0.0;
    for (double p : next.prob) kept += p;
    for (double& p : next.prob) p /= kept;
    next.rebuild_index();
    w = std::move(next);
  }
  run_em();

  // Exact renormalization before freezing log-probabilities.
  double total = 0.0;
  for (double p : w.prob) total += p;
  SubwordModel model;
  for (size_t i = 0; i < w.pieces.size(); ++i) {
    const double p = w.prob[i] / total;
    model.pieces.emplace_back(encode_utf8(w.pieces[i]),
                              p > 0.0 ? std::log(p) : -745.0);  // log of the smallest double
  }
  std::sort(model.pieces.begin(), model.pieces.end());
  return model;
}

int SubwordModel::piece_id(const std::string& piece) const {
  const auto it = std::lower_bound(pieces.begin(), pieces.end(), piece,
                                   [](const auto& a, const std::string& b) { return a.first < b; });
  if (it == pieces.end() || it->first != piece) return -1;
  return static_cast<int>(it - pieces.begin());
}

double SubwordModel::unk_logprob() const {
  double lo = 0.0;
  for (const auto& [_, lp] : pieces) lo = std::min(lo, lp);
  return lo - 10.0;
}

std::vector<SubwordPiece> encode_unigram(const SubwordModel& model, const std::string& text) {
  const std::u32string s = decode_utf8(text);
  const size_t n = s.size();
  if (n == 0) return {};
  if (model.pieces.empty()) throw Error::invalid("encode_unigram: empty model");

  size_t max_len = 1;
  std::unordered_map<std::u32string, double> logp;
  logp.reserve(model.pieces.size());
  for (const auto& [piece, lp] : model.pieces) {
    const auto u = decode_utf8(piece);
    max_len = std::max(max_len, u.size());
    logp.emplace(u, lp);
  }
  const double unk = model.unk_logprob();

  std::vector<double> best(n + 1, kNegInf);
  std::vector<size_t> from(n + 1, 0);
  std::vector<int8_t> known(n + 1, 0);
  best[0] = 0.0;
  for (size_t j = 1; j <= n; ++j) {
    // Longest pieces first, so score ties keep the longest piece.
    for (size_t len = std::min(max_len, j); len >= 1; --len) {
      if (best[j - len] == kNegInf) continue;
      const auto it = logp.find(s.substr(j - len, len));
      if (it == logp.end()) continue;
      const double v = best[j - len] + it->second;
      if (v > best[j]) {
        best[j] = v;
        from[j] = j - len;
        known[j] = 1;
      }
    }
    // Unknown characters go one at a time.
    if (best[j - 1] != kNegInf) {
      const double v = best[j - 1] + unk;
      if (v > best[j]) {
        best[j] = v;
        from[j] = j - 1;
        known[j] = 0;
      }
    }
  }

  std::vector<SubwordPiece> out;
  size_t j = n;
  while (j > 0) {
    const size_t i = from[j];
    out.push_back({encode_utf8(std::u32string_view(s).substr(i, j - i)), known[j] == 0});
    j = i;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

json SubwordModel::to_json() const {
  json arr = json::array();
  for (const auto& [piece, lp] : pieces) arr.push_back(json::array({piece, lp}));
  json j;
  j["version"] = 1;
  j["pieces"] = std::move(arr);
  j["special"] = {{"unk", special.unk},
                  {"space", special.space},
                  {"mask", special.mask},
                  {"pad", special.pad}};
  return j;
}

SubwordModel SubwordModel::from_json(const json& j) {
  if (j.at("version").get<int>() != 1) {
    throw Error::parse("subword payload: unsupported version");
  }
  SubwordModel m;
  for (const auto& entry : j.at("pieces")) {
    m.pieces.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<double>());
  }
  if (!std::is_sorted(m.pieces.begin(), m.pieces.end())) {
    std::sort(m.pieces.begin(), m.pieces.end());
  }
  const auto& sp = j.at("special");
  m.special.unk = sp.at("unk").get<std::string>();
  m.special.space = sp.at("space").get<std::string>();
  m.special.mask = sp.at("mask").get<std::string>();
  m.special.pad = sp.at("pad").get<std::string>();
  return m;
}

}  // namespace tsq
