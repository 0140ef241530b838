#include "abfrac/linalg.hpp"

#include <stdexcept>

namespace abfrac::linalg {

namespace {

void require_square(const Eigen::MatrixXd& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  }
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

}  // namespace

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A) {
  require_square(A, "eigenvalues");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalues: QR iteration failed to converge");
  }
  return es.eigenvalues();
}

HurwitzResult is_hurwitz(const Eigen::MatrixXd& A, double margin_tol) {
  const Eigen::VectorXcd ev = eigenvalues(A);
  HurwitzResult r;
  r.spectral_abscissa = ev.real().maxCoeff();
  r.hurwitz = r.spectral_abscissa < -margin_tol;
  return r;
}

bool is_symmetric(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_positive_definite(const Eigen::MatrixXd& M) {
  if (!is_symmetric(M)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  return llt.info() == Eigen::Success;
}

double lambda_min_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double lambda_max_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& Abar, const Eigen::MatrixXd& Q) {
  require_square(Abar, "solve_lyapunov");
  const Eigen::Index n = Abar.rows();
  if (Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  }
  if (n > 30) {
    throw std::invalid_argument("solve_lyapunov: Kronecker solve capped at n <= 30");
  }
  if (!is_symmetric(Q) || !is_positive_definite(Q)) {
    throw std::invalid_argument("solve_lyapunov: Q must be symmetric positive definite");
  }
  if (!is_hurwitz(Abar).hurwitz) {
    throw std::invalid_argument(
        "solve_lyapunov: Abar is not Hurwitz, no PD solution is guaranteed");
  }
  // vec(P Abar) = (Abar^T (x) I) vec(P);  vec(Abar^T P) = (I (x) Abar^T) vec(P)
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = kron(Abar.transpose(), I) + kron(I, Abar.transpose());
  Eigen::VectorXd rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -Q.col(j);
  const Eigen::VectorXd p = M.partialPivLu().solve(rhs);
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index j = 0; j < n; ++j) P.col(j) = p.segment(j * n, n);
  P = 0.5 * (P + P.transpose()).eval();

  const double residual = (P * Abar + Abar.transpose() * P + Q).norm();
  if (residual > 1e-8 * Q.norm()) {
    throw std::runtime_error("solve_lyapunov: residual exceeds 1e-8 * ||Q||");
  }
  if (!is_positive_definite(P)) {
    throw std::runtime_error("solve_lyapunov: solution is not positive definite");
  }
  return P;
}

double matignon_margin(const Eigen::MatrixXd& A, double alpha) {
  require_square(A, "matignon_margin");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("matignon_margin: alpha must lie in (0,1)");
  }
  const Eigen::VectorXcd ev = eigenvalues(A);
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    margin = std::min(margin, std::abs(std::arg(ev(i))) - alpha * M_PI / 2.0);
  }
  return margin;
}

Eigen::Index observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  require_square(A, "observability_rank");
  if (C.cols() != A.rows()) {
    throw std::invalid_argument("observability_rank: C has wrong column count");
  }
  const Eigen::Index n = A.rows(), m = C.rows();
  Eigen::MatrixXd O(m * n, n);
  Eigen::MatrixXd block = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    O.middleRows(i * m, m) = block;
    block = block * A;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(O);
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace abfrac::linalg
