#include "pert/owlqn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "pert/error.hpp"

namespace pert {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

std::size_t count_nonzero(std::span<const double> x) {
  std::size_t n = 0;
  for (double v : x) n += v != 0.0;
  return n;
}

// Minimum-norm subgradient of f + c * ||x||_1.
void pseudo_gradient(std::span<const double> x, std::span<const double> g, double c,
                     std::span<double> pg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      pg[i] = g[i] + c;
    } else if (x[i] < 0.0) {
      pg[i] = g[i] - c;
    } else if (g[i] + c < 0.0) {
      pg[i] = g[i] + c;
    } else if (g[i] - c > 0.0) {
      pg[i] = g[i] - c;
    } else {
      pg[i] = 0.0;
    }
  }
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

OwlqnResult minimize_owlqn(const SmoothObjective& f, std::vector<double> x0,
                           const OwlqnOptions& opt, const OwlqnCallback& callback) {
  const std::size_t n = x0.size();
  const double c = opt.l1;

  OwlqnResult result;
  result.x = std::move(x0);
  std::vector<double>& x = result.x;

  std::vector<double> g(n), pg(n), d(n), x_new(n), g_new(n), orthant(n);
  double fx = f(x, g);
  if (std::isnan(fx)) throw TrainingError("objective is not finite at iteration 0");
  if (c > 0.0) fx += c * l1_norm(x);
  result.initial_objective = fx;
  result.objective = fx;

  std::deque<Correction> history;

  for (std::size_t k = 1; k <= opt.max_iterations; ++k) {
    pseudo_gradient(x, g, c, pg);
    const double pg_norm = std::sqrt(dot(pg, pg));
    if (pg_norm == 0.0) {
      result.status = OwlqnStatus::Converged;
      return result;
    }

    // Two-loop recursion on the pseudo-gradient.
    for (std::size_t i = 0; i < n; ++i) d[i] = pg[i];
    std::vector<double> alpha(history.size());
    for (std::size_t j = history.size(); j-- > 0;) {
      const auto& h = history[j];
      alpha[j] = h.rho * dot(h.s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[j] * h.y[i];
    }
    if (!history.empty()) {
      const auto& h = history.back();
      const double gamma = dot(h.s, h.y) / dot(h.y, h.y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t j = 0; j < history.size(); ++j) {
      const auto& h = history[j];
      const double beta = h.rho * dot(h.y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += h.s[i] * (alpha[j] - beta);
    }
    for (double& v : d) v = -v;

    // Keep only components that descend along the pseudo-gradient.
    if (c > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
      }
    }
    if (dot(d, pg) >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
      history.clear();
    }

    for (std::size_t i = 0; i < n; ++i) {
      orthant[i] = x[i] != 0.0 ? (x[i] > 0.0 ? 1.0 : -1.0) : (pg[i] < 0.0 ? 1.0 : -1.0);
    }

    double step = history.empty() ? 1.0 / pg_norm : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (std::size_t b = 0; b < opt.max_backtracks; ++b, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = x[i] + step * d[i];
        if (c > 0.0 && v * orthant[i] <= 0.0) v = 0.0;
        x_new[i] = v;
      }
      f_new = f(x_new, g_new);
      if (std::isnan(f_new)) {
        throw TrainingError("objective is not finite at iteration " + std::to_string(k));
      }
      if (c > 0.0) f_new += c * l1_norm(x_new);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += pg[i] * (x_new[i] - x[i]);
      if (std::isfinite(f_new) && f_new <= fx + opt.armijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.status = OwlqnStatus::LineSearchFailed;
      return result;
    }

    Correction corr{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      corr.s[i] = x_new[i] - x[i];
      corr.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(corr.s, corr.y);
    if (sy > 0.0) {
      corr.rho = 1.0 / sy;
      history.push_back(std::move(corr));
      if (history.size() > opt.memory) history.pop_front();
    }

    const double f_prev = fx;
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    result.objective = fx;
    result.iterations = k;

    if (callback) callback(OwlqnStep{k, fx, step, count_nonzero(x)}, x);

    if ((f_prev - fx) / std::max(std::abs(fx), 1.0) < opt.tolerance) {
      result.status = OwlqnStatus::Converged;
      return result;
    }
  }
  result.status = OwlqnStatus::MaxIterations;
  return result;
}

}  // namespace pert
