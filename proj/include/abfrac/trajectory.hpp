#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace abfrac {

/// Uniformly sampled vector-valued signal on [t0, t0 + (N-1) dt].
/// Row k of `samples` is the state at t_k = t0 + k*dt.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd samples;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
  double time(Eigen::Index k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(size() - 1); }

  Eigen::VectorXd state(Eigen::Index k) const { return samples.row(k).transpose(); }
  double scalar(Eigen::Index k) const { return samples(k, 0); }

  bool same_grid(const Trajectory& other, double tol = 1e-12) const {
    return size() == other.size() && std::fabs(t0 - other.t0) <= tol &&
           std::fabs(dt - other.dt) <= tol;
  }
};

inline void require_grid(const Trajectory& x, Eigen::Index min_len = 2) {
  if (!(x.dt > 0.0)) throw std::invalid_argument("trajectory: dt must be positive");
  if (x.size() < min_len) {
    throw std::invalid_argument("trajectory: needs at least " +
                                std::to_string(min_len) + " samples");
  }
}

/// Sample a vector-valued function of time on a uniform grid of n points.
Trajectory sample_signal(double t0, double dt, Eigen::Index n,
                         const std::function<Eigen::VectorXd(double)>& f);

/// Scalar convenience overload.
Trajectory sample_scalar(double t0, double dt, Eigen::Index n,
                         const std::function<double(double)>& f);

/// Pointwise Euclidean norm, as a scalar trajectory on the same grid.
Trajectory norm_trajectory(const Trajectory& x);

/// Keep every stride-th sample (used for coarsened-grid error estimates).
Trajectory decimate(const Trajectory& x, Eigen::Index stride);

/// CSV round-trip: header "t,x1,...,xn", one row per sample, full precision.
void write_csv(const std::string& path, const Trajectory& x);
Trajectory read_csv(const std::string& path);

}  // namespace abfrac
