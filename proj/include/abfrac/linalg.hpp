#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace abfrac::linalg {

/// Eigenvalues of a square real matrix (Schur/QR via Eigen).
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A);

struct HurwitzResult {
  bool hurwitz = false;
  double spectral_abscissa = 0.0;  // max real part over the spectrum
};

/// True iff every eigenvalue satisfies Re(lambda) < -margin_tol.
HurwitzResult is_hurwitz(const Eigen::MatrixXd& A, double margin_tol = 1e-9);

/// Solves P*Abar + Abar^T*P = -Q for symmetric positive definite Q and
/// Hurwitz Abar, by Kronecker vectorization (dense, n <= 30). The returned
/// P is symmetrized and verified:  residual <= 1e-8 * ||Q||, P > 0.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& Abar, const Eigen::MatrixXd& Q);

/// min over eigenvalues of (|arg lambda| - alpha*pi/2). Positive means the
/// whole spectrum satisfies the classical Caputo angle condition; reported
/// as a diagnostic only (the Lyapunov route is the authoritative test).
double matignon_margin(const Eigen::MatrixXd& A, double alpha);

bool is_symmetric(const Eigen::MatrixXd& M, double tol = 1e-10);
bool is_positive_definite(const Eigen::MatrixXd& M);
double lambda_min_sym(const Eigen::MatrixXd& M);
double lambda_max_sym(const Eigen::MatrixXd& M);
double spectral_norm(const Eigen::MatrixXd& M);

/// Rank of [C; CA; ...; CA^(n-1)].
Eigen::Index observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

}  // namespace abfrac::linalg
