#include "tsq/crf.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "tsq/error.hpp"
#include "tsq/optim.hpp"

namespace tsq {

using nlohmann::json;

void CrfConfig::validate() const {
  if (c1 < 0.0 || c2 < 0.0) throw Error::config("c1 and c2 must be non-negative");
  if (max_iter < 1) throw Error::config("max_iter must be positive");
  if (tol <= 0.0) throw Error::config("tol must be positive");
  if (window < 1) throw Error::config("window must be positive");
  if (pad_token.empty()) throw Error::config("pad_token must be non-empty");
  if (feature_min_count < 1) throw Error::config("feature_min_count must be positive");
}

std::vector<std::string> extract_features(const std::vector<std::string>& tokens, size_t t,
                                          int window, const std::string& pad) {
  if (t >= tokens.size()) throw Error::invalid("extract_features: position out of range");
  auto at = [&](int off) -> const std::string& {
    const long p = static_cast<long>(t) + off;
    if (p < 0 || p >= static_cast<long>(tokens.size())) return pad;
    return tokens[static_cast<size_t>(p)];
  };
  std::vector<std::string> feats;
  feats.reserve(static_cast<size_t>(3 * window + 3 * window));
  for (int o = -window; o <= window; ++o) {
    feats.push_back("u[" + std::to_string(o) + "]=" + at(o));
  }
  for (int o = -window; o <= window - 1; ++o) {
    feats.push_back("b[" + std::to_string(o) + "]=" + at(o) + "|" + at(o + 1));
  }
  for (int o = -window; o <= window - 2; ++o) {
    feats.push_back("t[" + std::to_string(o) + "]=" + at(o) + "|" + at(o + 1) + "|" + at(o + 2));
  }
  feats.push_back("bias");
  return feats;
}

const std::unordered_map<std::string, int32_t>& CrfModel::feature_ids() const {
  if (index_.size() != feature_names.size()) {
    index_.clear();
    index_.reserve(feature_names.size());
    for (size_t i = 0; i < feature_names.size(); ++i) {
      index_.emplace(feature_names[i], static_cast<int32_t>(i));
    }
  }
  return index_;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Feature ids active at each position; unknown features are dropped.
std::vector<std::vector<int32_t>> compile(const CrfModel& model,
                                          const std::vector<std::string>& tokens) {
  const auto& ids = model.feature_ids();
  std::vector<std::vector<int32_t>> out(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) {
    const auto feats = extract_features(tokens, t, model.config.window, model.config.pad_token);
    out[t].reserve(feats.size());
    for (const auto& f : feats) {
      const auto it = ids.find(f);
      if (it != ids.end()) out[t].push_back(it->second);
    }
  }
  return out;
}

// T x L state score matrix.
std::vector<std::vector<double>> state_scores(const CrfModel& model,
                                              const std::vector<std::vector<int32_t>>& feats) {
  const size_t L = model.labels.size();
  std::vector<std::vector<double>> s(feats.size(), std::vector<double>(L, 0.0));
  for (size_t t = 0; t < feats.size(); ++t) {
    for (int32_t f : feats[t]) {
      const double* w = &model.state_w[static_cast<size_t>(f) * L];
      for (size_t y = 0; y < L; ++y) s[t][y] += w[y];
    }
  }
  return s;
}

struct Lattice {
  std::vector<std::vector<double>> alpha, beta;
  double log_z = 0.0;
};

Lattice forward_backward(const CrfModel& model, const std::vector<std::vector<double>>& state) {
  const size_t T = state.size();
  const size_t L = model.labels.size();
  Lattice lat;
  if (T == 0) return lat;
  lat.alpha.assign(T, std::vector<double>(L, 0.0));
  lat.beta.assign(T, std::vector<double>(L, 0.0));
  std::vector<double> tmp(L);

  lat.alpha[0] = state[0];
  for (size_t t = 1; t < T; ++t) {
    for (size_t y = 0; y < L; ++y) {
      for (size_t yp = 0; yp < L; ++yp) tmp[yp] = lat.alpha[t - 1][yp] + model.trans_w[yp * L + y];
      lat.alpha[t][y] = state[t][y] + logsumexp(tmp);
    }
  }
  for (size_t t = T - 1; t-- > 0;) {
    for (size_t yp = 0; yp < L; ++yp) {
      for (size_t y = 0; y < L; ++y) {
        tmp[y] = model.trans_w[yp * L + y] + state[t + 1][y] + lat.beta[t + 1][y];
      }
      lat.beta[t][yp] = logsumexp(tmp);
    }
  }
  lat.log_z = logsumexp(lat.alpha[T - 1]);
  return lat;
}

int label_id(const CrfModel& model, const std::string& tag) {
  const auto it = std::find(model.labels.begin(), model.labels.end(), tag);
  if (it == model.labels.end()) throw Error::invalid("unknown tag '" + tag + "'");
  return static_cast<int>(it - model.labels.begin());
}

// Log-likelihood of the batch plus, when grad is non-null, the accumulation
// of observed-minus-expected counts into it (layout [state..., trans...]).
double batch_ll(const CrfModel& model, const std::vector<TaggedSeq>& batch,
                std::vector<double>* grad) {
  const size_t L = model.labels.size();
  const size_t n_state = model.state_w.size();
  double ll = 0.0;
  for (const auto& seq : batch) {
    if (seq.tokens.empty()) continue;
    if (seq.tags.size() != seq.tokens.size()) {
      throw Error::shape("sequence '" + seq.id + "': tag count does not match token count");
    }
    const auto feats = compile(model, seq.tokens);
    const auto state = state_scores(model, feats);
    const auto lat = forward_backward(model, state);
    const size_t T = seq.tokens.size();

    double gold = 0.0;
    int prev = -1;
    for (size_t t = 0; t < T; ++t) {
      const int y = label_id(model, seq.tags[t]);
      gold += state[t][static_cast<size_t>(y)];
      if (prev >= 0) gold += model.trans_w[static_cast<size_t>(prev) * L + static_cast<size_t>(y)];
      if (grad) {
        for (int32_t f : feats[t]) (*grad)[static_cast<size_t>(f) * L + static_cast<size_t>(y)] += 1.0;
        if (prev >= 0) (*grad)[n_state + static_cast<size_t>(prev) * L + static_cast<size_t>(y)] += 1.0;
      }
      prev = y;
    }
    ll += gold - lat.log_z;

    if (!grad) continue;
    // Expected state counts from unary marginals.
    for (size_t t = 0; t < T; ++t) {
      for (size_t y = 0; y < L; ++y) {
        const double m = std::exp(lat.alpha[t][y] + lat.beta[t][y] - lat.log_z);
        for (int32_t f : feats[t]) (*grad)[static_cast<size_t>(f) * L + y] -= m;
      }
    }
    // Expected transition counts from pairwise marginals.
    for (size_t t = 1; t < T; ++t) {
      for (size_t yp = 0; yp < L; ++yp) {
        for (size_t y = 0; y < L; ++y) {
          const double m = std::exp(lat.alpha[t - 1][yp] + model.trans_w[yp * L + y] +
                                    state[t][y] + lat.beta[t][y] - lat.log_z);
          (*grad)[n_state + yp * L + y] -= m;
        }
      }
    }
  }
  return ll;
}

std::vector<double> pack_weights(const CrfModel& model) {
  std::vector<double> w;
  w.reserve(model.state_w.size() + model.trans_w.size());
  w.insert(w.end(), model.state_w.begin(), model.state_w.end());
  w.insert(w.end(), model.trans_w.begin(), model.trans_w.end());
  return w;
}

}  // namespace

double log_partition(const CrfModel& model, const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0.0;
  if (model.labels.empty()) throw Error::invalid("log_partition: model has no labels");
  const auto feats = compile(model, tokens);
  return forward_backward(model, state_scores(model, feats)).log_z;
}

std::vector<std::string> viterbi(const CrfModel& model, const std::vector<std::string>& tokens) {
  if (tokens.empty()) return {};
  if (model.labels.empty()) throw Error::invalid("viterbi: model has no labels");
  const size_t L = model.labels.size();
  const size_t T = tokens.size();
  const auto state = state_scores(model, compile(model, tokens));

  std::vector<std::vector<double>> delta(T, std::vector<double>(L, 0.0));
  std::vector<std::vector<int>> back(T, std::vector<int>(L, 0));
  delta[0] = state[0];
  for (size_t t = 1; t < T; ++t) {
    for (size_t y = 0; y < L; ++y) {
      double best = kNegInf;
      int arg = 0;
      for (size_t yp = 0; yp < L; ++yp) {
        const double v = delta[t - 1][yp] + model.trans_w[yp * L + y];
        if (v > best) {  // strict: ties keep the lowest previous label
          best = v;
          arg = static_cast<int>(yp);
        }
      }
      delta[t][y] = best + state[t][y];
      back[t][y] = arg;
    }
  }
  size_t last = 0;
  for (size_t y = 1; y < L; ++y) {
    if (delta[T - 1][y] > delta[T - 1][last]) last = y;
  }
  std::vector<std::string> tags(T);
  size_t cur = last;
  for (size_t t = T; t-- > 0;) {
    tags[t] = model.labels[cur];
    if (t > 0) cur = static_cast<size_t>(back[t][cur]);
  }
  return tags;
}

double crf_objective(const CrfModel& model, const std::vector<TaggedSeq>& batch) {
  double obj = batch_ll(model, batch, nullptr);
  for (double w : model.state_w) obj -= model.config.c1 * std::abs(w) + model.config.c2 * w * w;
  for (double w : model.trans_w) obj -= model.config.c1 * std::abs(w) + model.config.c2 * w * w;
  return obj;
}

std::vector<double> crf_gradient(const CrfModel& model, const std::vector<TaggedSeq>& batch) {
  std::vector<double> grad(model.state_w.size() + model.trans_w.size(), 0.0);
  batch_ll(model, batch, &grad);
  const auto w = pack_weights(model);
  for (size_t i = 0; i < w.size(); ++i) {
    grad[i] -= 2.0 * model.config.c2 * w[i];
    if (w[i] > 0.0) grad[i] -= model.config.c1;
    else if (w[i] < 0.0) grad[i] += model.config.c1;
  }
  return grad;
}

CrfTrainResult train_crf(const std::vector<TaggedSeq>& data, const CrfConfig& cfg) {
  cfg.validate();

  std::vector<TaggedSeq> train;
  train.reserve(data.size());
  for (const auto& seq : data) {
    if (seq.tokens.empty()) {
      std::cerr << "train_crf: skipping empty sequence '" << seq.id << "'\n";
      continue;
    }
    if (seq.tags.size() != seq.tokens.size()) {
      throw Error::shape("sequence '" + seq.id + "': tag count does not match token count");
    }
    train.push_back(seq);
  }
  if (train.empty()) throw Error::train("train_crf: no non-empty sequences");

  CrfTrainResult out;
  CrfModel& model = out.model;
  model.config = cfg;

  std::set<std::string> label_set;
  for (const auto& seq : train) label_set.insert(seq.tags.begin(), seq.tags.end());
  model.labels.assign(label_set.begin(), label_set.end());
  const size_t L = model.labels.size();

  // Feature vocabulary: counted over the training set, thresholded, ids in
  // first-seen order.
  {
    std::unordered_map<std::string, int32_t> counts;
    std::vector<std::string> order;
    for (const auto& seq : train) {
      for (size_t t = 0; t < seq.tokens.size(); ++t) {
        for (auto& f : extract_features(seq.tokens, t, cfg.window, cfg.pad_token)) {
          auto [it, fresh] = counts.emplace(std::move(f), 0);
          if (fresh) order.push_back(it->first);
          ++it->second;
        }
      }
    }
    for (auto& f : order) {
      if (counts[f] >= cfg.feature_min_count) model.feature_names.push_back(std::move(f));
    }
  }

  const size_t n_state = model.feature_names.size() * L;
  const size_t dim = n_state + L * L;
  model.state_w.assign(n_state, 0.0);
  model.trans_w.assign(L * L, 0.0);

  Objective f = [&](const std::vector<double>& x, std::vector<double>& grad) {
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_state), model.state_w.begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(n_state), x.end(), model.trans_w.begin());
    std::fill(grad.begin(), grad.end(), 0.0);
    double ll = batch_ll(model, train, &grad);
    // Minimize the negated objective; the l1 part lives in the optimizer.
    for (size_t i = 0; i < dim; ++i) {
      ll -= cfg.c2 * x[i] * x[i];
      grad[i] = -grad[i] + 2.0 * cfg.c2 * x[i];
    }
    return -ll;
  };

  OptimOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  if (cfg.c1 > 0.0) {
    opts.l1 = cfg.c1;
    opts.l1_begin = 0;
    opts.l1_end = dim;
  }
  auto r = minimize(f, std::vector<double>(dim, 0.0), opts);
  std::copy(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n_state), model.state_w.begin());
  std::copy(r.x.begin() + static_cast<std::ptrdiff_t>(n_state), r.x.end(), model.trans_w.begin());
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.objective = -r.value;
  if (!r.converged) {
    std::cerr << "train_crf: stopped after " << r.iterations
              << " iterations without reaching tol\n";
  }
  return out;
}

json CrfModel::to_json() const {
  json j;
  j["labels"] = labels;
  j["features"] = feature_names;
  const size_t L = labels.size();
  json state = json::array();
  for (size_t f = 0; f < feature_names.size(); ++f) {
    for (size_t y = 0; y < L; ++y) {
      const double w = state_w[f * L + y];
      if (w != 0.0) state.push_back(json::array({f, y, w}));
    }
  }
  j["state_weights"] = std::move(state);
  j["transitions"] = trans_w;
  j["config"] = {{"c1", config.c1},
                 {"c2", config.c2},
                 {"max_iter", config.max_iter},
                 {"tol", config.tol},
                 {"window", config.window},
                 {"pad_token", config.pad_token},
                 {"feature_min_count", config.feature_min_count}};
  return j;
}

CrfModel CrfModel::from_json(const json& j) {
  CrfModel m;
  m.labels = j.at("labels").get<std::vector<std::string>>();
  m.feature_names = j.at("features").get<std::vector<std::string>>();
  const size_t L = m.labels.size();
  m.state_w.assign(m.feature_names.size() * L, 0.0);
  for (const auto& triple : j.at("state_weights")) {
    const auto f = triple.at(0).get<size_t>();
    const auto y = triple.at(1).get<size_t>();
    if (f >= m.feature_names.size() || y >= L) {
      throw Error::parse("crf payload: state weight index out of range");
    }
    m.state_w[f * L + y] = triple.at(2).get<double>();
  }
  m.trans_w = j.at("transitions").get<std::vector<double>>();
  if (m.trans_w.size() != L * L) throw Error::parse("crf payload: transition matrix size mismatch");
  const auto& c = j.at("config");
  m.config.c1 = c.at("c1").get<double>();
  m.config.c2 = c.at("c2").get<double>();
  m.config.max_iter = c.at("max_iter").get<int>();
  m.config.tol = c.at("tol").get<double>();
  m.config.window = c.at("window").get<int>();
  m.config.pad_token = c.at("pad_token").get<std::string>();
  m.config.feature_min_count = c.at("feature_min_count").get<int>();
  return m;
}

}  // namespace tsq
