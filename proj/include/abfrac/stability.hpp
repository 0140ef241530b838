#pragma once

#include <optional>

#include "abfrac/fracops.hpp"
#include "abfrac/report.hpp"
#include "abfrac/trajectory.hpp"

namespace abfrac::stability {

/// Bound profile M * [E_alpha(-c t^alpha)]^d. A negative rate c encodes a
/// growing bound (Theorem-1 style); c >= 0 decays monotonically.
struct Envelope {
  double coeff = 0.0;  // M >= 0
  double rate = 0.0;   // c, signed
  double power = 1.0;  // d > 0
  double alpha = 0.5;

  double operator()(double t) const;
};

/// Constants of the Theorem-2 Lyapunov conditions
///   a1 ||x||^a <= V <= a2 ||x||^(ab),  ABC-D V <= -a3 ||x||^(ab)
/// together with the derived quantities of the proof.
struct LyapunovConditions {
  double a = 1.0, b = 1.0;
  double alpha1 = 1.0, alpha2 = 1.0, alpha3 = 1.0;

  double gamma(const fracops::FractionalOrder& ord) const {
    return (1.0 - ord.alpha) * alpha3 / (ord.b_of_alpha * alpha2);
  }
  double kappa0(const fracops::FractionalOrder& ord) const {
    const double g = gamma(ord);
    return g * ord.alpha / ((g + 1.0) * (1.0 - ord.alpha));
  }
  double kappa1(double v0, const fracops::FractionalOrder& ord) const {
    return v0 / (gamma(ord) + 1.0);
  }
  double kappa2(const fracops::FractionalOrder& ord) const {
    return (1.0 - ord.alpha) / (ord.b_of_alpha * (gamma(ord) + 1.0));
  }
  double kappa3(const fracops::FractionalOrder& ord) const {
    return ord.alpha / (ord.b_of_alpha * (gamma(ord) + 1.0));
  }
};

/// Theorem-1 growth bound ||x(t)|| <= M E_a(+kappa a/(B - kappa(1-a)) t^a);
/// requires B(alpha) > kappa (1 - alpha).
Envelope growth_envelope(double kappa, double x0_norm,
                         const fracops::FractionalOrder& ord);

/// Theorem-2 decay bound from the Lyapunov conditions.
Envelope ml_stability_envelope(const LyapunovConditions& cond, double x0_norm,
                               const fracops::FractionalOrder& ord);

/// Pointwise containment ||err(t_k)|| <= env(t_k - t0) (1 + tol).
CheckReport check_ml_bound(const Trajectory& err, const Envelope& env,
                           double tol = 1e-2);

/// Comparison lemma: if ABC-D x >= ABC-D y everywhere (x(t0) = y(t0)),
/// then x >= y everywhere; reports both verdicts and their consistency.
struct ComparisonReport {
  CheckReport report;
  bool derivative_dominance = false;
  bool ordering = false;
};
ComparisonReport check_comparison(const Trajectory& x, const Trajectory& y,
                                  const fracops::FractionalOrder& ord);

/// Class-K function catalog: gamma(s) = c s^p with c, p > 0.
struct ClassK {
  double c = 1.0;
  double p = 2.0;
  double operator()(double s) const;
};

/// Verifies ABC-D V(t_k) <= -gamma3(||x(t_k)||) + tol pointwise.
CheckReport lyapunov_monitor(const Trajectory& v_values, const Trajectory& x,
                             const ClassK& gamma3, const fracops::FractionalOrder& ord);

/// Pointwise inequality check D[v](t_k) <= rhs(t_k) + tol where D[v] is the
/// ABC (or ABR) derivative of the scalar trajectory v. Used by the observer
/// monitors with custom right-hand sides.
CheckReport derivative_upper_bound(const std::string& name, const Trajectory& v,
                                   const Trajectory& rhs,
                                   const fracops::FractionalOrder& ord,
                                   bool use_abr = false);

enum class Inequality { E36, E38, E39, E40, E41, E42, E43 };

/// The Lyapunov inequality suite. Shapes per selector:
///   E36: x scalar;                    1/2 ABC-D x^2        <= x ABC-D x
///   E38: phi decreasing, x >= 0;      ABC-D (phi x)        <= phi ABC-D x
///   E39: phi increasing, x >= 0;      ABC-D (phi x)        >= phi ABC-D x
///   E40: phi, x vector, per E38;      ABC-D (phi^T x)      <= phi^T ABC-D x
///   E41: phi >= 0 decreasing;         ABC-D (phi x^2)      <= 2 phi x ABC-D x
///   E42: phi >= 0 decr., x vector, P; ABC-D (phi x^T P x)  <= 2 phi x^T P ABC-D x
///   E43: x vector, P;                 ABC-D (x^T P x)      <= 2 x^T P ABC-D x
/// Precondition violations (monotonicity, sign, P not SPD) are reported as
/// input errors, distinct from inequality failures.
CheckReport inequality_suite(const Trajectory& phi, const Trajectory& x,
                             const std::optional<Eigen::MatrixXd>& P,
                             const fracops::FractionalOrder& ord, Inequality which);

const char* inequality_name(Inequality which);

}  // namespace abfrac::stability
