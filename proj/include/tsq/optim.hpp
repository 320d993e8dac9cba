#pragma once

#include <functional>
#include <vector>

namespace tsq {

/// Smooth part of the objective: fills grad (same length as x) and returns
/// the value. The l1 term, when any, is handled by the optimizer itself.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

struct OptimOptions {
  int max_iter = 1000;
  // Convergence: infinity norm of the gradient, or of the orthant-wise
  // pseudo-gradient when l1 > 0.
  double tol = 1e-6;
  int history = 10;
  // l1 penalty coefficient applied to coordinates [l1_begin, l1_end).
  double l1 = 0.0;
  size_t l1_begin = 0;
  size_t l1_end = 0;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;          // smooth part plus l1 term
  double grad_inf_norm = 0.0;  // pseudo-gradient norm at exit
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS; with opts.l1 > 0 it runs the orthant-wise variant,
/// which produces exact zeros in the penalized coordinates.
OptimResult minimize(const Objective& f, std::vector<double> x0, const OptimOptions& opts);

}  // namespace tsq
