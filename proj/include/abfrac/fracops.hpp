#pragma once

#include <vector>

#include "abfrac/report.hpp"
#include "abfrac/trajectory.hpp"

namespace abfrac::fracops {

/// Fractional order alpha in (0,1) together with the normalization B(alpha).
struct FractionalOrder {
  double alpha;
  double b_of_alpha;

  explicit FractionalOrder(double a, double b = 1.0) : alpha(a), b_of_alpha(b) {
    if (!(a > 0.0) || !(a < 1.0)) {
      throw std::invalid_argument("FractionalOrder: alpha must lie in (0,1)");
    }
    if (!(b > 0.0)) {
      throw std::invalid_argument("FractionalOrder: B(alpha) must be positive");
    }
  }

  /// Rate q of the Mittag-Leffler kernel E_alpha(-q (t - tau)^alpha).
  double kernel_rate() const { return alpha / (1.0 - alpha); }
};

/// Riemann-Liouville fractional integral of order alpha > 0 on a uniform
/// grid, product-trapezoidal (exact for piecewise-linear data against the
/// power kernel). Output value at t0 is 0.
Trajectory rl_integral(const Trajectory& x, double alpha);
inline Trajectory rl_integral(const Trajectory& x, const FractionalOrder& ord) {
  return rl_integral(x, ord.alpha);
}

/// AB fractional integral: (1-a)/B * x(t) + a/B * RL-integral.
Trajectory ab_integral(const Trajectory& x, const FractionalOrder& ord);

/// AB derivative of Caputo type: Mittag-Leffler-kernel convolution of the
/// first derivative of x (second-order finite differences, one-sided at the
/// endpoints). Needs at least 3 samples; value at t0 is 0.
Trajectory abc_derivative(const Trajectory& x, const FractionalOrder& ord);

/// AB derivative of Riemann-Liouville type, via the ABC derivative plus the
/// initial-value kernel term (the two share the same quadrature).
Trajectory abr_derivative(const Trajectory& x, const FractionalOrder& ord);

/// Second-order finite-difference time derivative (helper for the checks).
Trajectory fd_derivative(const Trajectory& x);

/// Product-trapezoid weights for the Mittag-Leffler kernel on a uniform
/// grid. Weight pairs are indexed by the gap m = k - j >= 1: the data cell
/// [t_j, t_{j+1}] contributes left(m)*d_j + right(m)*d_{j+1} to the
/// convolution evaluated at t_k. Exposed for the positivity property.
struct MlKernelWeights {
  std::vector<double> left;
  std::vector<double> right;
};
MlKernelWeights ml_kernel_weights(const FractionalOrder& ord, double dt,
                                  Eigen::Index n_gaps);

/// ABC <= ABR pointwise when x(t0) >= 0 (scalar trajectories).
CheckReport check_lemma2_inequality(const Trajectory& x, const FractionalOrder& ord);

/// Newton-Leibniz identity: AB-integral of the ABC derivative recovers
/// x(t) - x(t0) up to O(dt^2); the constant is estimated from a
/// coarsened-grid re-evaluation.
CheckReport check_newton_leibniz(const Trajectory& x, const FractionalOrder& ord);

/// Norm bound of the AB integral: ||AB-I x|| <= AB-I ||x|| pointwise.
CheckReport check_integral_norm_inequality(const Trajectory& x,
                                           const FractionalOrder& ord);

}  // namespace abfrac::fracops
