#pragma once

#include <variant>

#include "abfrac/linalg.hpp"
#include "abfrac/solver.hpp"
#include "abfrac/stability.hpp"
#include "abfrac/sysdsl.hpp"

namespace abfrac::observers {

enum class Family { Linear, HighGain, Lipschitz };

/// One of the three observer families with its gains, scaling and
/// coordinate-change data, plus the certificate matrices it was designed
/// against. Construct through design_linear / build_high_gain /
/// build_lipschitz so the invariants hold.
struct ObserverSpec {
  Family family = Family::Linear;

  Eigen::MatrixXd A;  // plant matrix (shift matrix for the high-gain family)
  Eigen::MatrixXd C;  // output map
  Eigen::MatrixXd K;  // injection gain

  // High-gain family
  double theta = 1.0;
  Eigen::MatrixXd Pi;        // diag(theta, theta^2, ..., theta^n)
  sysdsl::VectorField phi;   // triangular nonlinearity
  double kappa_phi = 0.0;    // sampled Lipschitz constant of phi

  // Lipschitz family: phi = phi1(y) + grad(phi2)(y) ABC-D y + phi3(x)
  sysdsl::VectorField phi1, phi2, phi3;
  sysdsl::Box box;           // sampling region for sup||grad phi3||
  double sup_grad_phi3 = 0.0;

  Eigen::MatrixXd P, Q;      // Lyapunov certificate pair
  Eigen::VectorXd xhat0;

  bool condition_pass = true;  // design-condition verdict (simulations only warn)
  std::string condition_note;
};

/// Simulation outcome of a coupled plant/observer run, with the fitted
/// Mittag-Leffler envelope and the Lyapunov-decay monitor. The verdict
/// requires the envelope containment to pass and the terminal error not to
/// exceed the initial error.
struct ObserverReport {
  Trajectory plant;       // plant state x
  Trajectory estimate;    // observer estimate x-hat
  Trajectory error;       // x - x-hat
  stability::Envelope fitted_envelope;
  CheckReport envelope_check;
  CheckReport lyapunov_check;
  CheckReport error_dynamics_check;  // linear family: joint run vs direct error system
  bool verdict = false;
  Eigen::MatrixXd P, Q;
  std::vector<std::string> warnings;
};

/// Linear Luenberger design: user gain K, or the automatic shift placement
/// K = P_o^{-1} C^T with P_o solving the Lyapunov equation of -(A + sigma I)
/// against C^T C (a stabilizing heuristic; requires sigma > -min Re
/// eig(A)). The certificate P solves P Abar + Abar^T P = -Q, Abar = A - KC.
ObserverSpec design_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const std::variant<double, Eigen::MatrixXd>& gain,
                           const Eigen::MatrixXd& Q);

/// Coupled run of the linear observer; also integrates the error system
/// ABC-D e = (A - KC) e directly and records the pointwise agreement.
ObserverReport simulate_linear(const solver::IVP& plant, const ObserverSpec& spec,
                               const solver::SolveOptions& opts = {});

/// High-gain observer for the triangular canonical form
///   ABC-D x = A_shift x + phi(x, u), y = x1,
/// with injection Pi(theta)^{-1} K (y - x-hat_1). The field phi must be
/// lower-triangular: component k may depend only on x1..xk (and u, t).
ObserverSpec build_high_gain(const sysdsl::VectorField& phi, const Eigen::MatrixXd& K,
                             double theta);

/// Decay-rate test of the scaled error system:
///   rho = -1/(theta lambda_max(Q)) + 2 (lambda_min(Q)/lambda_max(Q)) kappa_phi n^2,
/// pass iff rho < 0; the implied threshold theta < 1/(2 lambda_min(Q)
/// kappa_phi n^2) is reported alongside.
CheckReport high_gain_condition(double theta, const Eigen::MatrixXd& Q,
                                double kappa_phi, Eigen::Index n);

ObserverReport simulate_high_gain(const solver::IVP& plant, const ObserverSpec& spec,
                                  const solver::SolveOptions& opts = {});

/// Observer for ABC-D x = A x + phi1(y) + grad(phi2)(y) ABC-D y + phi3(x),
/// y = C x, built in the coordinates z = x - phi2(y) with output
/// y1 = y - C phi2(y). Verifies Q(A-KC) + (A-KC)^T Q = -P to 1e-8.
ObserverSpec build_lipschitz(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                             const sysdsl::VectorField& phi1,
                             const sysdsl::VectorField& phi2,
                             const sysdsl::VectorField& phi3,
                             const Eigen::MatrixXd& K, const Eigen::MatrixXd& P,
                             const Eigen::MatrixXd& Q, const sysdsl::Box& box);

/// Smallness test sup||grad phi3|| < lambda_min(P) / (2 lambda_max(Q)),
/// with the supremum estimated by sampling `box`.
CheckReport lipschitz_condition(const sysdsl::VectorField& phi3,
                                const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                                const sysdsl::Box& box, int samples = 400);

ObserverReport simulate_lipschitz(const solver::IVP& plant, const ObserverSpec& spec,
                                  const solver::SolveOptions& opts = {});

/// Fit (M, c) of M E_alpha(-c t^alpha) to the sampled error norm (d = 1);
/// the coefficient is then inflated so the envelope touches the data from
/// above, which is the existence witness Definition-6 asks for.
stability::Envelope fit_ml_envelope(const Trajectory& error, double alpha);

}  // namespace abfrac::observers
