#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pert {

/// Orthant-wise limited-memory quasi-Newton (OWL-QN) for
///   minimize f(x) + l1 * ||x||_1
/// where f is smooth. With l1 == 0 this is plain L-BFGS with a backtracking
/// Armijo line search.
struct OwlqnOptions {
  double l1 = 0.0;
  std::size_t memory = 10;
  std::size_t max_iterations = 100;
  /// Stop once (f_prev - f) / max(|f|, 1) falls below this.
  double tolerance = 1e-5;
  std::size_t max_backtracks = 40;
  double armijo = 1e-4;
};

/// Evaluates the smooth part at x, writing its gradient into `grad`.
using SmoothObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct OwlqnStep {
  std::size_t iteration = 0;
  /// Full objective including the L1 term.
  double objective = 0.0;
  double step = 0.0;
  std::size_t nonzero = 0;
};

/// Called after every accepted step with the new point.
using OwlqnCallback = std::function<void(const OwlqnStep&, std::span<const double> x)>;

enum class OwlqnStatus { Converged, MaxIterations, LineSearchFailed };

struct OwlqnResult {
  std::vector<double> x;
  double initial_objective = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  OwlqnStatus status = OwlqnStatus::MaxIterations;
};

/// Throws TrainingError when the objective is NaN (at the start or at a
/// trial point); +inf trial points are treated as too long a step.
OwlqnResult minimize_owlqn(const SmoothObjective& f, std::vector<double> x0,
                           const OwlqnOptions& options, const OwlqnCallback& callback = {});

}  // namespace pert
