#pragma once

#include <stdexcept>
#include <string>

namespace abfrac::mlf {

/// Argument rejected: gamma pole, non-convergence, or outside the
/// validated evaluation domain documented below.
class EvaluationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter pair of the two-parameter Mittag-Leffler function.
/// beta = 1 selects the one-parameter function.
struct MLParams {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Classical gamma function. Throws EvaluationError at the poles
/// z = 0, -1, -2, ... Relative error below 1e-12 on [0.1, 50].
double gamma_fn(double z);

/// Reciprocal gamma 1/Gamma(z); entire, returns 0 at the poles.
double rgamma(double z);

/// One-parameter Mittag-Leffler function E_alpha(z), alpha in (0, 2].
double ml_one(double alpha, double z);

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z).
///
/// Evaluation routes: defended power series near the origin (rejected when
/// floating-point cancellation would eat the accuracy budget), a truncated
/// asymptotic expansion far out on the negative axis, and an integral
/// representation in between (0 < alpha < 1). Validated domain, real z,
/// target 1e-10 relative:
///   * 0 < alpha <= 1 - 1e-5:  all z <= 0, and z > 0 up to overflow;
///   * alpha == 1:             beta in {1, 2, 3} any z; other beta near origin;
///   * 1 < alpha <= 2:         z >= 0 (order-halving reduction), z < 0 only
///                             where series or asymptotics self-validate.
/// Arguments outside this domain throw EvaluationError; overflow on the
/// positive axis returns +infinity.
double ml_two(double alpha, double beta, double z);

inline double ml_one(const MLParams& p, double z) { return ml_two(p.alpha, p.beta, z); }

/// Radius below which the power series is attempted first (default 5).
double ml_series_radius();

}  // namespace abfrac::mlf
