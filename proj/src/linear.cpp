#include "tsq/linear.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tsq/error.hpp"
#include "tsq/optim.hpp"

namespace tsq {

using nlohmann::json;

PenaltyKind penalty_from_string(const std::string& s) {
  if (s == "l1") return PenaltyKind::l1;
  if (s == "l2") return PenaltyKind::l2;
  throw Error::config("unknown penalty '" + s + "' (expected l1 or l2)");
}

std::string to_string(PenaltyKind p) { return p == PenaltyKind::l1 ? "l1" : "l2"; }

void ClassifierConfig::validate() const {
  if (C <= 0.0) throw Error::config("C must be positive");
  if (alpha <= 0.0) throw Error::config("alpha must be positive");
  if (max_iter < 1) throw Error::config("max_iter must be positive");
  if (tol <= 0.0) throw Error::config("tol must be positive");
}

namespace {

// log(1 + e^m) without overflow.
double log1pexp(double m) { return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

double sigmoid(double m) {
  return m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
}

}  // namespace

BinaryFit train_logistic(const SparseMatrix& X, const std::vector<int>& y,
                         const ClassifierConfig& cfg) {
  cfg.validate();
  if (X.n_rows() != y.size()) throw Error::shape("train_logistic: row count does not match y");
  if (X.n_rows() == 0) throw Error::train("train_logistic: empty training set");
  size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error::invalid("train_logistic: y entries must be 0 or 1");
    pos += static_cast<size_t>(v);
  }
  if (pos == 0 || pos == y.size()) {
    throw Error::train("train_logistic: both classes must be present");
  }

  const size_t n_feat = X.n_cols;
  const double inv_n = 1.0 / static_cast<double>(X.n_rows());
  const bool l2 = cfg.penalty == PenaltyKind::l2;

  // Parameter layout: weights then intercept as the trailing coordinate.
  Objective f = [&](const std::vector<double>& wb, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (size_t i = 0; i < X.rows.size(); ++i) {
      double m = wb[n_feat];
      for (const auto& [col, val] : X.rows[i]) m += wb[col] * val;
      loss += log1pexp(m) - (y[i] ? m : 0.0);
      const double resid = sigmoid(m) - static_cast<double>(y[i]);
      for (const auto& [col, val] : X.rows[i]) grad[col] += resid * val;
      grad[n_feat] += resid;
    }
    loss *= inv_n;
    for (double& g : grad) g *= inv_n;
    if (l2) {
      const double k = 1.0 / cfg.C;
      for (size_t j = 0; j < n_feat; ++j) {
        loss += 0.5 * k * wb[j] * wb[j];
        grad[j] += k * wb[j];
      }
    }
    return loss;
  };

  OptimOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  if (!l2) {
    opts.l1 = 1.0 / cfg.C;
    opts.l1_begin = 0;
    opts.l1_end = n_feat;  // intercept stays unpenalized
  }

  auto r = minimize(f, std::vector<double>(n_feat + 1, 0.0), opts);
  BinaryFit fit;
  fit.weights.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n_feat));
  fit.bias = r.x[n_feat];
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  fit.grad_inf_norm = r.grad_inf_norm;
  return fit;
}

namespace {

std::vector<std::string> collect_classes(const std::vector<std::vector<std::string>>& labels,
                                         bool multi_label) {
  std::set<std::string> set;
  for (const auto& ls : labels) {
    if (!multi_label && ls.size() != 1) {
      throw Error::invalid("single-label training needs exactly one label per document");
    }
    for (const auto& l : ls) set.insert(l);
  }
  if (set.size() < 2 && !multi_label) {
    throw Error::train("training needs at least two distinct classes");
  }
  if (set.empty()) throw Error::train("training needs at least one label");
  return {set.begin(), set.end()};
}

}  // namespace

LinearModel train_one_vs_rest(const SparseMatrix& X,
                              const std::vector<std::vector<std::string>>& labels,
                              bool multi_label, const ClassifierConfig& cfg) {
  cfg.validate();
  if (X.n_rows() != labels.size()) throw Error::shape("train_one_vs_rest: label count mismatch");
  LinearModel model;
  model.classes = collect_classes(labels, multi_label);
  model.multi_label = multi_label;
  for (const auto& cls : model.classes) {
    std::vector<int> y(labels.size(), 0);
    for (size_t i = 0; i < labels.size(); ++i) {
      y[i] = std::find(labels[i].begin(), labels[i].end(), cls) != labels[i].end() ? 1 : 0;
    }
    auto r = nb_ratio(X, y, cfg.alpha);
    auto fit = train_logistic(scale_by_ratio(X, r), y, cfg);
    model.ratios.push_back(std::move(r));
    model.weights.push_back(std::move(fit.weights));
    model.bias.push_back(fit.bias);
    model.converged.push_back(fit.converged);
  }
  return model;
}

std::vector<std::vector<double>> predict_proba(const LinearModel& model, const SparseMatrix& X) {
  const size_t n_classes = model.classes.size();
  if (n_classes == 0) throw Error::invalid("predict_proba: empty model");
  for (const auto& w : model.weights) {
    if (w.size() != X.n_cols) throw Error::shape("predict_proba: feature dimension mismatch");
  }

  std::vector<std::vector<double>> out(X.n_rows(), std::vector<double>(n_classes, 0.0));
  for (size_t i = 0; i < X.rows.size(); ++i) {
    auto& row = out[i];
    for (size_t c = 0; c < n_classes; ++c) {
      double z = model.bias[c];
      const auto& r = model.ratios[c];
      const auto& w = model.weights[c];
      for (const auto& [col, val] : X.rows[i]) z += val * r[col] * w[col];
      row[c] = z;
    }
    if (model.multi_label) {
      for (double& z : row) z = sigmoid(z);
    } else {
      const double zmax = *std::max_element(row.begin(), row.end());
      double sum = 0.0;
      for (double& z : row) {
        z = std::exp(z - zmax);
        sum += z;
      }
      for (double& z : row) z /= sum;
    }
  }
  return out;
}

json LinearModel::to_json() const {
  json j;
  j["classes"] = classes;
  j["multi_label"] = multi_label;
  j["ratios"] = ratios;
  j["weights"] = weights;
  j["bias"] = bias;
  std::vector<int> conv;
  conv.reserve(converged.size());
  for (bool b : converged) conv.push_back(b ? 1 : 0);
  j["converged"] = conv;
  return j;
}

LinearModel LinearModel::from_json(const json& j) {
  LinearModel m;
  m.classes = j.at("classes").get<std::vector<std::string>>();
  m.multi_label = j.at("multi_label").get<bool>();
  m.ratios = j.at("ratios").get<std::vector<std::vector<double>>>();
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  for (int v : j.at("converged").get<std::vector<int>>()) m.converged.push_back(v != 0);
  if (m.ratios.size() != m.classes.size() || m.weights.size() != m.classes.size() ||
      m.bias.size() != m.classes.size()) {
    throw Error::parse("classifier payload: per-class array lengths differ");
  }
  return m;
}

namespace {

struct F1Counts {
  size_t tp = 0, fp = 0, fn = 0;
  double f1() const {
    const size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
};

double grid_score(const LinearModel& model, const SparseMatrix& X_valid,
                  const std::vector<std::vector<std::string>>& y_valid, bool multi_label) {
  const auto proba = predict_proba(model, X_valid);
  const size_t n_classes = model.classes.size();
  std::vector<F1Counts> counts(n_classes);
  for (size_t i = 0; i < proba.size(); ++i) {
    std::vector<bool> gold(n_classes, false), pred(n_classes, false);
    for (const auto& l : y_valid[i]) {
      const auto it = std::find(model.classes.begin(), model.classes.end(), l);
      if (it != model.classes.end()) gold[static_cast<size_t>(it - model.classes.begin())] = true;
    }
    if (multi_label) {
      for (size_t c = 0; c < n_classes; ++c) pred[c] = proba[i][c] >= 0.5;
    } else {
      pred[static_cast<size_t>(std::max_element(proba[i].begin(), proba[i].end()) -
                               proba[i].begin())] = true;
    }
    for (size_t c = 0; c < n_classes; ++c) {
      if (gold[c] && pred[c]) ++counts[c].tp;
      else if (pred[c]) ++counts[c].fp;
      else if (gold[c]) ++counts[c].fn;
    }
  }
  if (multi_label) {
    double macro = 0.0;
    for (const auto& c : counts) macro += c.f1();
    return macro / static_cast<double>(n_classes);
  }
  F1Counts micro;
  for (const auto& c : counts) {
    micro.tp += c.tp;
    micro.fp += c.fp;
    micro.fn += c.fn;
  }
  return micro.f1();
}

}  // namespace

GridResult grid_search(const SparseMatrix& X_train,
                       const std::vector<std::vector<std::string>>& y_train,
                       const SparseMatrix& X_valid,
                       const std::vector<std::vector<std::string>>& y_valid, bool multi_label,
                       const std::vector<PenaltyKind>& penalties, const std::vector<double>& Cs,
                       const ClassifierConfig& base) {
  if (penalties.empty() || Cs.empty()) throw Error::config("grid_search: empty grid");
  GridResult result;
  std::vector<LinearModel> models;
  for (const auto penalty : penalties) {
    for (const double C : Cs) {
      GridCell cell;
      cell.penalty = penalty;
      cell.C = C;
      ClassifierConfig cfg = base;
      cfg.penalty = penalty;
      cfg.C = C;
      try {
        auto model = train_one_vs_rest(X_train, y_train, multi_label, cfg);
        cell.score = grid_score(model, X_valid, y_valid, multi_label);
        models.push_back(std::move(model));
      } catch (const Error& e) {
        cell.failed = true;
        cell.error = e.what();
        models.emplace_back();
      }
      result.cells.push_back(std::move(cell));
    }
  }

  std::vector<size_t> order(result.cells.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ca = result.cells[a];
    const auto& cb = result.cells[b];
    if (ca.failed != cb.failed) return !ca.failed;
    if (ca.score != cb.score) return ca.score > cb.score;
    if (ca.penalty != cb.penalty) return to_string(ca.penalty) < to_string(cb.penalty);
    return ca.C < cb.C;
  });

  std::vector<GridCell> sorted;
  sorted.reserve(order.size());
  for (size_t i : order) sorted.push_back(result.cells[i]);
  if (sorted.empty() || sorted.front().failed) {
    throw Error::train("grid_search: every cell failed" +
                       (sorted.empty() ? "" : (": " + sorted.front().error)));
  }
  result.best_model = std::move(models[order.front()]);
  result.cells = std::move(sorted);
  return result;
}

ThresholdSet search_thresholds(const std::vector<std::vector<double>>& proba,
                               const std::vector<std::vector<int>>& y) {
  if (proba.size() != y.size()) throw Error::shape("search_thresholds: row count mismatch");
  if (proba.empty()) throw Error::invalid("search_thresholds: empty input");
  const size_t n_labels = proba[0].size();
  for (size_t i = 0; i < proba.size(); ++i) {
    if (proba[i].size() != n_labels || y[i].size() != n_labels) {
      throw Error::shape("search_thresholds: ragged rows");
    }
    for (double p : proba[i]) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error::invalid("search_thresholds: proba outside [0, 1]");
    }
  }

  ThresholdSet out;
  out.thresholds.assign(n_labels, 0.5);
  out.defaulted.assign(n_labels, false);
  for (size_t l = 0; l < n_labels; ++l) {
    size_t positives = 0;
    for (size_t i = 0; i < y.size(); ++i) positives += y[i][l] != 0 ? 1u : 0u;
    if (positives == 0) {
      out.defaulted[l] = true;
      continue;
    }
    double best_f1 = -1.0;
    double best_t = 0.5;
    for (int k = 1; k <= 99; ++k) {
      const double t = static_cast<double>(k) / 100.0;
      F1Counts c;
      for (size_t i = 0; i < proba.size(); ++i) {
        const bool pred = proba[i][l] >= t;
        const bool gold = y[i][l] != 0;
        if (pred && gold) ++c.tp;
        else if (pred) ++c.fp;
        else if (gold) ++c.fn;
      }
      const double f1 = c.f1();
      if (f1 > best_f1) {
        best_f1 = f1;
        best_t = t;
      }
    }
    out.thresholds[l] = best_t;
  }
  return out;
}

}  // namespace tsq
