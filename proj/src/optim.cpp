#include "tsq/optim.hpp"

#include <cmath>
#include <cstddef>
#include <deque>

#include "tsq/error.hpp"

namespace tsq {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

struct Penalty {
  double lambda = 0.0;
  size_t begin = 0, end = 0;

  bool active() const { return lambda > 0.0 && end > begin; }
  bool covers(size_t i) const { return i >= begin && i < end; }

  double term(const std::vector<double>& x) const {
    if (!active()) return 0.0;
    double s = 0.0;
    for (size_t i = begin; i < end; ++i) s += std::abs(x[i]);
    return lambda * s;
  }

  // Pseudo-gradient of smooth + lambda*|x|: at zero coordinates it is the
  // smallest-magnitude subgradient, zero inside the flat interval.
  void pseudo_gradient(const std::vector<double>& x, const std::vector<double>& g,
                       std::vector<double>& pg) const {
    pg = g;
    if (!active()) return;
    for (size_t i = begin; i < end; ++i) {
      if (x[i] > 0.0) {
        pg[i] = g[i] + lambda;
      } else if (x[i] < 0.0) {
        pg[i] = g[i] - lambda;
      } else if (g[i] + lambda < 0.0) {
        pg[i] = g[i] + lambda;
      } else if (g[i] - lambda > 0.0) {
        pg[i] = g[i] - lambda;
      } else {
        pg[i] = 0.0;
      }
    }
  }
};

}  // namespace

OptimResult minimize(const Objective& f, std::vector<double> x0, const OptimOptions& opts) {
  if (opts.max_iter < 1) throw Error::config("max_iter must be positive");
  if (opts.tol <= 0.0) throw Error::config("tol must be positive");

  const size_t n = x0.size();
  Penalty pen{opts.l1, opts.l1_begin, std::min(opts.l1_end, n)};

  OptimResult res;
  res.x = std::move(x0);
  std::vector<double> g(n, 0.0), pg(n, 0.0);
  double fx = f(res.x, g);
  double F = fx + pen.term(res.x);
  pen.pseudo_gradient(res.x, g, pg);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> mem;  // (s, y)
  std::vector<double> d(n), x_new(n), g_new(n), alpha_buf;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.grad_inf_norm = inf_norm(pg);
    if (res.grad_inf_norm < opts.tol) {
      res.converged = true;
      res.iterations = iter;
      res.value = F;
      return res;
    }

    // Two-loop recursion on the pseudo-gradient.
    d = pg;
    for (double& v : d) v = -v;
    alpha_buf.assign(mem.size(), 0.0);
    for (size_t k = mem.size(); k-- > 0;) {
      const auto& [s, y] = mem[k];
      const double rho = 1.0 / dot(s, y);
      alpha_buf[k] = rho * dot(s, d);
      for (size_t i = 0; i < n; ++i) d[i] -= alpha_buf[k] * y[i];
    }
    if (!mem.empty()) {
      const auto& [s, y] = mem.back();
      const double gamma = dot(s, y) / dot(y, y);
      for (double& v : d) v *= gamma;
    }
    for (size_t k = 0; k < mem.size(); ++k) {
      const auto& [s, y] = mem[k];
      const double rho = 1.0 / dot(s, y);
      const double beta = rho * dot(y, d);
      for (size_t i = 0; i < n; ++i) d[i] += (alpha_buf[k] - beta) * s[i];
    }

    if (pen.active()) {
      // Keep only components that still descend against the pseudo-gradient.
      for (size_t i = pen.begin; i < pen.end; ++i) {
        if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
      }
    }

    double dir_deriv = dot(pg, d);
    if (!(dir_deriv < 0.0)) {
      // Bad curvature information; fall back to steepest descent.
      mem.clear();
      d = pg;
      for (double& v : d) v = -v;
      dir_deriv = dot(pg, d);
      if (!(dir_deriv < 0.0)) {
        res.iterations = iter;
        res.value = F;
        res.converged = res.grad_inf_norm < opts.tol;
        return res;
      }
    }

    double step = mem.empty() ? std::min(1.0, 1.0 / two_norm(d)) : 1.0;
    const double c1 = 1e-4;
    bool accepted = false;
    double F_new = F;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * d[i];
      if (pen.active()) {
        // Project onto the orthant picked by the current point, or by the
        // steepest descent direction where the point sits at zero.
        for (size_t i = pen.begin; i < pen.end; ++i) {
          const double xi = res.x[i] != 0.0 ? res.x[i] : -pg[i];
          if (x_new[i] * xi < 0.0) x_new[i] = 0.0;
        }
      }
      const double fx_new = f(x_new, g_new);
      F_new = fx_new + pen.term(x_new);
      // Armijo condition measured along the actually taken move.
      double taken = 0.0;
      for (size_t i = 0; i < n; ++i) taken += pg[i] * (x_new[i] - res.x[i]);
      if (F_new <= F + c1 * taken && taken < 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.iterations = iter;
      res.value = F;
      res.converged = res.grad_inf_norm < opts.tol;
      return res;
    }

    std::vector<double> s(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * two_norm(s) * two_norm(y)) {
      mem.emplace_back(std::move(s), std::move(y));
      if (mem.size() > static_cast<size_t>(opts.history)) mem.pop_front();
    }

    res.x.swap(x_new);
    g.swap(g_new);
    F = F_new;
    pen.pseudo_gradient(res.x, g, pg);
    res.iterations = iter + 1;
  }

  res.grad_inf_norm = inf_norm(pg);
  res.converged = res.grad_inf_norm < opts.tol;
  res.value = F;
  return res;
}

}  // namespace tsq
