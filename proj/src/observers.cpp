#include "abfrac/observers.hpp"

#include <cmath>

#include "abfrac/mlf.hpp"

namespace abfrac::observers {

namespace {

Trajectory scalar_traj(const Trajectory& ref) {
  Trajectory out;
  out.t0 = ref.t0;
  out.dt = ref.dt;
  out.samples = Eigen::MatrixXd::Zero(ref.size(), 1);
  return out;
}

void common_post(ObserverReport& rep, const fracops::FractionalOrder& ord,
                 const Eigen::MatrixXd& P_quad, const Trajectory& v_state,
                 double decay_coeff, const std::string& monitor_name) {
  // V = s^T P_quad s along v_state, checked against -decay_coeff ||s||^2
  Trajectory V = scalar_traj(v_state);
  Trajectory rhs = scalar_traj(v_state);
  for (Eigen::Index k = 0; k < v_state.size(); ++k) {
    const Eigen::VectorXd s = v_state.samples.row(k).transpose();
    V.samples(k, 0) = s.dot(P_quad * s);
    rhs.samples(k, 0) = -decay_coeff * s.squaredNorm();
  }
  rep.lyapunov_check = stability::derivative_upper_bound(monitor_name, V, rhs, ord);
}

void finish_report(ObserverReport& rep, const fracops::FractionalOrder& ord) {
  rep.fitted_envelope = fit_ml_envelope(rep.error, ord.alpha);
  rep.envelope_check = stability::check_ml_bound(rep.error, rep.fitted_envelope, 2e-2);
  const double e0 = rep.error.samples.row(0).norm();
  const double eT = rep.error.samples.row(rep.error.size() - 1).norm();
  const double floor = 1e-12 * std::max(1.0, rep.plant.samples.cwiseAbs().maxCoeff());
  rep.verdict = rep.envelope_check.pass && (eT <= e0 * (1.0 + 1e-9) + floor);
}

}  // namespace

stability::Envelope fit_ml_envelope(const Trajectory& error, double alpha) {
  require_grid(error);
  stability::Envelope env;
  env.alpha = alpha;
  env.power = 1.0;
  const Eigen::Index n = error.size();
  Eigen::VectorXd r(n);
  for (Eigen::Index k = 0; k < n; ++k) r(k) = error.samples.row(k).norm();
  const double rmax = r.maxCoeff();
  if (rmax <= 0.0) {
    env.coeff = 0.0;
    env.rate = 0.0;
    return env;
  }
  const double floor = 1e-13 * rmax;
  std::vector<Eigen::Index> usable;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (r(k) > floor) usable.push_back(k);
  }
  // least squares of log r against log(M E_a(-c t^a)) on a subsample, then
  // scan/refine the rate; d is pinned to 1
  std::vector<Eigen::Index> sub;
  const Eigen::Index stride = std::max<Eigen::Index>(1, usable.size() / 200);
  for (std::size_t i = 0; i < usable.size(); i += stride) sub.push_back(usable[i]);
  const double T = std::max(error.t_end() - error.t0, error.dt);
  const double Ta = std::pow(T, alpha);
  const auto sse_of = [&](double c) {
    double mean = 0.0;
    std::vector<double> resid(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
      const double t = error.time(sub[i]) - error.t0;
      const double e = mlf::ml_one(alpha, -c * std::pow(t, alpha));
      resid[i] = std::log(r(sub[i])) - std::log(e);
      mean += resid[i];
    }
    mean /= static_cast<double>(sub.size());
    double sse = 0.0;
    for (double v : resid) sse += (v - mean) * (v - mean);
    return sse;
  };
  double best_c = 0.0, best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 48; ++i) {
    const double z_end = std::pow(10.0, -2.0 + 8.0 * i / 47.0);  // c T^a in [1e-2, 1e6]
    const double c = z_end / Ta;
    const double sse = sse_of(c);
    if (sse < best_sse) {
      best_sse = sse;
      best_c = c;
    }
  }
  // golden-section refinement around the best grid point
  {
    double lo = best_c / 2.0, hi = best_c * 2.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = sse_of(x1), f2 = sse_of(x2);
    for (int it = 0; it < 24; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = sse_of(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = sse_of(x2);
      }
    }
    best_c = 0.5 * (lo + hi);
  }
  env.rate = best_c;
  // containment witness: lift M so the profile touches the data from above
  double M = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = error.time(k) - error.t0;
    const double e = mlf::ml_one(alpha, -best_c * std::pow(t, alpha));
    M = std::max(M, r(k) / e);
  }
  env.coeff = M;
  return env;
}

ObserverSpec design_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const std::variant<double, Eigen::MatrixXd>& gain,
                           const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.cols() != n || C.rows() < 1) {
    throw std::invalid_argument("design_linear: A must be square, C must map the state");
  }
  if (linalg::observability_rank(A, C) < n) {
    throw std::invalid_argument("design_linear: (A, C) is not observable");
  }
  ObserverSpec spec;
  spec.family = Family::Linear;
  spec.A = A;
  spec.C = C;
  if (std::holds_alternative<Eigen::MatrixXd>(gain)) {
    spec.K = std::get<Eigen::MatrixXd>(gain);
    if (spec.K.rows() != n || spec.K.cols() != C.rows()) {
      throw std::invalid_argument("design_linear: K must be n x p");
    }
  } else {
    // Shift placement: P_o (A + sigma I) + (A + sigma I)^T P_o = C^T C + eps I,
    // then K = P_o^{-1} C^T certifies A - KC through
    //   P_o (A - KC) + (A - KC)^T P_o = -(C^T C + eps I) - 2 sigma P_o < 0.
    const double sigma = std::get<double>(gain);
    const Eigen::MatrixXd shifted = -(A + sigma * Eigen::MatrixXd::Identity(n, n));
    if (!linalg::is_hurwitz(shifted).hurwitz) {
      throw std::invalid_argument(
          "design_linear: sigma must exceed -min Re eig(A) for the shift placement");
    }
    const Eigen::MatrixXd Qo =
        C.transpose() * C + 1e-9 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Po = linalg::solve_lyapunov(shifted, Qo);
    spec.K = Po.partialPivLu().solve(C.transpose());
  }
  const Eigen::MatrixXd Abar = A - spec.K * C;
  if (!linalg::is_hurwitz(Abar).hurwitz) {
    throw std::invalid_argument("design_linear: the gain does not stabilize A - KC");
  }
  spec.Q = Q;
  spec.P = linalg::solve_lyapunov(Abar, Q);
  return spec;
}

ObserverSpec build_high_gain(const sysdsl::VectorField& phi, const Eigen::MatrixXd& K,
                             double theta) {
  const Eigen::Index n = phi.size();
  if (n < 1) throw std::invalid_argument("build_high_gain: empty field");
  if (!(theta > 0.0)) throw std::invalid_argument("build_high_gain: theta must be > 0");
  if (phi.dims.n_states != static_cast<int>(n)) {
    throw std::invalid_argument("build_high_gain: phi arity must match the state dim");
  }
  // triangular structure: component k may touch x1..xk (u and t are free)
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto deps = sysdsl::dependencies(phi.components[k]);
    for (int idx : deps.states) {
      if (idx > k + 1) {
        throw std::invalid_argument(
            "build_high_gain: phi_" + std::to_string(k + 1) + " depends on x" +
            std::to_string(idx) + ", violating the triangular structure");
      }
    }
  }
  ObserverSpec spec;
  spec.family = Family::HighGain;
  spec.A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) spec.A(i, i + 1) = 1.0;
  spec.C = Eigen::MatrixXd::Zero(1, n);
  spec.C(0, 0) = 1.0;
  spec.K = K;
  if (K.rows() != n || K.cols() != 1) {
    throw std::invalid_argument("build_high_gain: K must be n x 1");
  }
  const Eigen::MatrixXd Abar = spec.A - K * spec.C;
  if (!linalg::is_hurwitz(Abar).hurwitz) {
    throw std::invalid_argument("build_high_gain: A - KC is not Hurwitz");
  }
  spec.theta = theta;
  spec.Pi = Eigen::MatrixXd::Zero(n, n);
  double p = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    p *= theta;
    spec.Pi(i, i) = p;
  }
  spec.phi = phi;
  // Q solves Abar^T Q + Q Abar = -I (the certificate of the scaled system)
  spec.Q = linalg::solve_lyapunov(Abar, Eigen::MatrixXd::Identity(n, n));
  sysdsl::Box box{Eigen::VectorXd::Constant(n, -3.0), Eigen::VectorXd::Constant(n, 3.0)};
  spec.kappa_phi = sysdsl::lipschitz_estimate(phi, box, 200);
  const CheckReport cond = high_gain_condition(theta, spec.Q, spec.kappa_phi, n);
  spec.condition_pass = cond.pass;
  spec.condition_note = cond.detail;
  return spec;
}

CheckReport high_gain_condition(double theta, const Eigen::MatrixXd& Q,
                                double kappa_phi, Eigen::Index n) {
  if (!(theta > 0.0)) {
    throw std::invalid_argument("high_gain_condition: theta must be positive");
  }
  if (!linalg::is_symmetric(Q) || !linalg::is_positive_definite(Q)) {
    throw std::invalid_argument("high_gain_condition: Q must be symmetric PD");
  }
  const double lmin = linalg::lambda_min_sym(Q);
  const double lmax = linalg::lambda_max_sym(Q);
  const double rho =
      -1.0 / (theta * lmax) +
      2.0 * (lmin / lmax) * kappa_phi * static_cast<double>(n * n);
  CheckReport r;
  r.check = "high_gain_condition";
  r.pass = rho < 0.0;
  r.worst_margin = rho;
  r.tol = 0.0;
  const double denom = 2.0 * lmin * kappa_phi * static_cast<double>(n * n);
  char buf[160];
  if (denom > 0.0) {
    std::snprintf(buf, sizeof buf, "rho=%.6g; requires theta < %.6g", rho,
                  1.0 / denom);
  } else {
    std::snprintf(buf, sizeof buf, "rho=%.6g; passes for every theta > 0", rho);
  }
  r.detail = buf;
  return r;
}

ObserverSpec build_lipschitz(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                             const sysdsl::VectorField& phi1,
                             const sysdsl::VectorField& phi2,
                             const sysdsl::VectorField& phi3,
                             const Eigen::MatrixXd& K, const Eigen::MatrixXd& P,
                             const Eigen::MatrixXd& Q, const sysdsl::Box& box) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = C.rows();
  if (A.cols() != n || C.cols() != n) {
    throw std::invalid_argument("build_lipschitz: bad A/C shapes");
  }
  if (K.rows() != n || K.cols() != p) {
    throw std::invalid_argument("build_lipschitz: K must be n x p");
  }
  const auto check_field = [&](const sysdsl::VectorField& f, Eigen::Index arity,
                               int arg_dim, const char* who) {
    if (f.size() == 0) return;  // optional piece
    if (f.size() != arity || f.dims.n_states != arg_dim) {
      throw std::invalid_argument(std::string("build_lipschitz: ") + who +
                                  " has wrong arity");
    }
  };
  check_field(phi1, n, static_cast<int>(p), "phi1(y)");
  check_field(phi2, n, static_cast<int>(p), "phi2(y)");
  check_field(phi3, n, static_cast<int>(n), "phi3(x)");
  if (!linalg::is_symmetric(P) || !linalg::is_positive_definite(P) ||
      !linalg::is_symmetric(Q) || !linalg::is_positive_definite(Q)) {
    throw std::invalid_argument("build_lipschitz: P and Q must be symmetric PD");
  }
  const Eigen::MatrixXd Abar = A - K * C;
  const Eigen::MatrixXd residual = Q * Abar + Abar.transpose() * Q + P;
  if (residual.norm() > 1e-8 * std::max(1.0, P.norm())) {
    throw std::invalid_argument(
        "build_lipschitz: Q(A-KC) + (A-KC)^T Q = -P fails beyond 1e-8");
  }
  ObserverSpec spec;
  spec.family = Family::Lipschitz;
  spec.A = A;
  spec.C = C;
  spec.K = K;
  spec.phi1 = phi1;
  spec.phi2 = phi2;
  spec.phi3 = phi3;
  spec.P = P;
  spec.Q = Q;
  spec.box = box;
  if (phi3.size() > 0) {
    spec.sup_grad_phi3 = sysdsl::lipschitz_estimate(phi3, box, 400) / 1.05;
  }
  const CheckReport cond = lipschitz_condition(phi3, P, Q, box);
  spec.condition_pass = cond.pass;
  spec.condition_note = cond.detail;
  return spec;
}

CheckReport lipschitz_condition(const sysdsl::VectorField& phi3,
                                const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                                const sysdsl::Box& box, int samples) {
  if (!linalg::is_symmetric(P) || !linalg::is_positive_definite(P) ||
      !linalg::is_symmetric(Q) || !linalg::is_positive_definite(Q)) {
    throw std::invalid_argument("lipschitz_condition: P and Q must be symmetric PD");
  }
  const double sup_grad =
      phi3.size() == 0 ? 0.0 : sysdsl::lipschitz_estimate(phi3, box, samples) / 1.05;
  const double threshold =
      0.5 * linalg::lambda_min_sym(P) / linalg::lambda_max_sym(Q);
  CheckReport r;
  r.check = "lipschitz_condition";
  r.pass = sup_grad < threshold;
  r.worst_margin = sup_grad - threshold;
  r.tol = 0.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "sup||grad phi3|| ~ %.6g (sampled) vs lambda_min(P)/(2 lambda_max(Q)) "
                "= %.6g",
                sup_grad, threshold);
  r.detail = buf;
  return r;
}

}  // namespace abfrac::observers

namespace abfrac::solver {

namespace {

using observers::Family;
using observers::ObserverSpec;

Eigen::VectorXd default_xhat0(const ObserverSpec& spec, Eigen::Index n) {
  if (spec.xhat0.size() == 0) return Eigen::VectorXd::Zero(n);
  if (spec.xhat0.size() != n) {
    throw std::invalid_argument("observer: xhat0 dimension mismatch");
  }
  return spec.xhat0;
}

CoupledResult run_linear_joint(const IVP& plant, const ObserverSpec& spec,
                               const SolveOptions& opts) {
  if (plant.system.type != SystemDef::Type::Linear) {
    throw std::invalid_argument("linear observer requires a linear plant");
  }
  const Eigen::Index n = plant.system.A.rows();
  if (spec.A.rows() != n) {
    throw std::invalid_argument("observer/plant dimension mismatch");
  }
  Eigen::MatrixXd Aj = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Aj.topLeftCorner(n, n) = plant.system.A;
  Aj.bottomLeftCorner(n, n) = spec.K * spec.C;
  Aj.bottomRightCorner(n, n) = spec.A - spec.K * spec.C;
  Eigen::MatrixXd Bj;
  if (plant.system.B.size() > 0) {
    Bj.resize(2 * n, plant.system.B.cols());
    Bj.topRows(n) = plant.system.B;
    Bj.bottomRows(n) = plant.system.B;
  }
  IVP joint = plant;
  joint.system = make_linear_system(Aj, Bj, Eigen::MatrixXd::Zero(1, 2 * n),
                                    plant.system.input);
  joint.x0.resize(2 * n);
  joint.x0.head(n) = plant.x0;
  joint.x0.tail(n) = default_xhat0(spec, n);
  SolveResult jr = integrate(joint, opts);
  CoupledResult out;
  out.plant = jr;
  out.observer = jr;
  out.plant.trajectory.samples = jr.trajectory.samples.leftCols(n).eval();
  out.observer.trajectory.samples = jr.trajectory.samples.rightCols(n).eval();
  return out;
}

CoupledResult run_high_gain_joint(const IVP& plant, const ObserverSpec& spec,
                                  const SolveOptions& opts) {
  const Eigen::Index n = spec.A.rows();
  if (plant.system.state_dim() != n) {
    throw std::invalid_argument("observer/plant dimension mismatch");
  }
  const Eigen::MatrixXd gain = spec.Pi.inverse() * spec.K;  // n x 1
  const auto joint_rhs = [&plant, &spec, gain, n](double t, const Eigen::VectorXd& s) {
    const Eigen::VectorXd x = s.head(n);
    const Eigen::VectorXd xh = s.tail(n);
    const Eigen::VectorXd u = plant.system.input_at(t);
    Eigen::VectorXd out(2 * n);
    out.head(n) = plant.system.rhs(t, x);
    Eigen::VectorXd fh = spec.A * xh + sysdsl::eval_field(spec.phi, xh, u, t);
    const double y = (spec.C * x)(0);
    fh += gain * (y - xh(0));
    out.tail(n) = fh;
    return out;
  };
  Eigen::VectorXd s0(2 * n);
  s0.head(n) = plant.x0;
  s0.tail(n) = default_xhat0(spec, n);
  SolveResult jr = integrate_rhs(joint_rhs, s0, plant.ord, plant.t0, plant.dt,
                                 static_cast<Eigen::Index>(
                                     std::llround((plant.T - plant.t0) / plant.dt)) +
                                     1,
                                 opts);
  CoupledResult out;
  out.plant = jr;
  out.observer = jr;
  out.plant.trajectory.samples = jr.trajectory.samples.leftCols(n).eval();
  out.observer.trajectory.samples = jr.trajectory.samples.rightCols(n).eval();
  return out;
}

CoupledResult run_lipschitz_joint(const IVP& plant, const ObserverSpec& spec,
                                  const SolveOptions& opts) {
  const Eigen::Index n = spec.A.rows();
  if (plant.x0.size() != n) {
    throw std::invalid_argument("observer/plant dimension mismatch");
  }
  const Eigen::VectorXd none;
  const auto piece_of = [n](const sysdsl::VectorField& f, const Eigen::VectorXd& arg,
                            double t) -> Eigen::VectorXd {
    if (f.size() == 0) return Eigen::VectorXd::Zero(n);
    return sysdsl::eval_field(f, arg, Eigen::VectorXd(), t);
  };
  const auto phi2_of = [&spec, piece_of](const Eigen::VectorXd& y, double t) {
    return piece_of(spec.phi2, y, t);
  };
  // y from z: fixed point y = C (z + phi2(y)); exact when phi2 == 0
  const auto y_of = [&](const Eigen::VectorXd& z, double t) -> Eigen::VectorXd {
    Eigen::VectorXd y = spec.C * z;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd next = spec.C * (z + phi2_of(y, t));
      const double step = (next - y).cwiseAbs().maxCoeff();
      y = next;
      if (!y.allFinite() || step <= 1e-14 * std::max(1.0, y.cwiseAbs().maxCoeff())) {
        break;
      }
    }
    return y;
  };

  const auto joint_rhs = [&, n](double t, const Eigen::VectorXd& s) {
    const Eigen::VectorXd z = s.head(n);
    const Eigen::VectorXd zh = s.tail(n);
    const Eigen::VectorXd y = y_of(z, t);
    const Eigen::VectorXd p2 = phi2_of(y, t);
    const Eigen::VectorXd shared = piece_of(spec.phi1, y, t) + spec.A * p2;
    Eigen::VectorXd out(2 * n);
    out.head(n) = spec.A * z + shared + piece_of(spec.phi3, z + p2, t);
    // new output y1 = C z; injection K (y1 - C z-hat)
    out.tail(n) = spec.A * zh + shared + piece_of(spec.phi3, zh + p2, t) +
                  spec.K * (spec.C * (z - zh));
    return out;
  };

  const Eigen::VectorXd y0 = spec.C * plant.x0;
  const Eigen::VectorXd p20 = phi2_of(y0, plant.t0);
  Eigen::VectorXd s0(2 * n);
  s0.head(n) = plant.x0 - p20;
  s0.tail(n) = default_xhat0(spec, n) - p20;
  SolveResult jr = integrate_rhs(joint_rhs, s0, plant.ord, plant.t0, plant.dt,
                                 static_cast<Eigen::Index>(
                                     std::llround((plant.T - plant.t0) / plant.dt)) +
                                     1,
                                 opts);
  // map back: x = z + phi2(y(z)), x-hat = z-hat + phi2(y(z))
  CoupledResult out;
  out.plant = jr;
  out.observer = jr;
  out.plant.trajectory.samples.resize(jr.trajectory.size(), n);
  out.observer.trajectory.samples.resize(jr.trajectory.size(), n);
  for (Eigen::Index k = 0; k < jr.trajectory.size(); ++k) {
    const double tk = jr.trajectory.time(k);
    const Eigen::VectorXd z = jr.trajectory.samples.row(k).head(n).transpose();
    const Eigen::VectorXd zh = jr.trajectory.samples.row(k).tail(n).transpose();
    const Eigen::VectorXd p2 = phi2_of(y_of(z, tk), tk);
    out.plant.trajectory.samples.row(k) = (z + p2).transpose();
    out.observer.trajectory.samples.row(k) = (zh + p2).transpose();
  }
  return out;
}

}  // namespace

CoupledResult integrate_coupled(const IVP& plant, const ObserverSpec& spec,
                                const SolveOptions& opts) {
  switch (spec.family) {
    case Family::Linear: return run_linear_joint(plant, spec, opts);
    case Family::HighGain: return run_high_gain_joint(plant, spec, opts);
    case Family::Lipschitz: return run_lipschitz_joint(plant, spec, opts);
  }
  throw std::logic_error("unknown observer family");
}

}  // namespace abfrac::solver

namespace abfrac::observers {

ObserverReport simulate_linear(const solver::IVP& plant, const ObserverSpec& spec,
                               const solver::SolveOptions& opts) {
  if (spec.family != Family::Linear) {
    throw std::invalid_argument("simulate_linear: wrong observer family");
  }
  solver::CoupledResult run = solver::integrate_coupled(plant, spec, opts);
  ObserverReport rep;
  rep.P = spec.P;
  rep.Q = spec.Q;
  rep.plant = run.plant.trajectory;
  rep.estimate = run.observer.trajectory;
  for (const auto& w : run.plant.warnings) rep.warnings.push_back(w);
  if (run.plant.diverged) {
    rep.warnings.push_back("coupled run diverged; report truncated");
    rep.error = rep.plant;
    rep.error.samples -= rep.estimate.samples;
    return rep;
  }
  rep.error = rep.plant;
  rep.error.samples -= rep.estimate.samples;

  // Eq.-(48) consistency: the error must match a direct run of the error
  // system on the same grid
  {
    solver::IVP esys = plant;
    esys.system = solver::make_linear_system(spec.A - spec.K * spec.C, {},
                                             Eigen::MatrixXd::Zero(1, spec.A.rows()));
    esys.x0 = rep.error.state(0);
    const solver::SolveResult direct = solver::integrate(esys, opts);
    CheckReport cr;
    cr.check = "error_dynamics_eq48";
    cr.tol = 1e-8;
    cr.worst_margin = (direct.trajectory.samples - rep.error.samples)
                          .cwiseAbs()
                          .maxCoeff();
    cr.pass = cr.worst_margin <= cr.tol;
    rep.error_dynamics_check = cr;
  }

  common_post(rep, plant.ord, spec.P, rep.error,
              linalg::lambda_min_sym(spec.Q), "linear_observer_lyapunov");
  finish_report(rep, plant.ord);
  return rep;
}

ObserverReport simulate_high_gain(const solver::IVP& plant, const ObserverSpec& spec,
                                  const solver::SolveOptions& opts) {
  if (spec.family != Family::HighGain) {
    throw std::invalid_argument("simulate_high_gain: wrong observer family");
  }
  solver::CoupledResult run = solver::integrate_coupled(plant, spec, opts);
  ObserverReport rep;
  rep.P = spec.P;
  rep.Q = spec.Q;
  rep.plant = run.plant.trajectory;
  rep.estimate = run.observer.trajectory;
  for (const auto& w : run.plant.warnings) rep.warnings.push_back(w);
  if (!spec.condition_pass) {
    rep.warnings.push_back("high-gain condition failed at design time: " +
                           spec.condition_note);
  }
  if (run.plant.diverged) {
    rep.warnings.push_back("coupled run diverged; report truncated");
    rep.error = rep.plant;
    rep.error.samples -= rep.estimate.samples;
    return rep;
  }
  rep.error = rep.plant;
  rep.error.samples -= rep.estimate.samples;

  // scaled coordinates: eps = Pi (xhat - x); ABC-D V <= rho V with
  // V = eps^T Q eps
  const Eigen::Index n = spec.A.rows();
  Trajectory scaled = rep.error;
  for (Eigen::Index k = 0; k < scaled.size(); ++k) {
    scaled.samples.row(k) =
        (spec.Pi * (rep.estimate.state(k) - rep.plant.state(k))).transpose();
  }
  const double lmin = linalg::lambda_min_sym(spec.Q);
  const double lmax = linalg::lambda_max_sym(spec.Q);
  const double rho = -1.0 / (spec.theta * lmax) +
                     2.0 * (lmin / lmax) * spec.kappa_phi *
                         static_cast<double>(n * n);
  Trajectory V = scalar_traj(scaled);
  Trajectory rhs = scalar_traj(scaled);
  for (Eigen::Index k = 0; k < scaled.size(); ++k) {
    const Eigen::VectorXd e = scaled.state(k);
    V.samples(k, 0) = e.dot(spec.Q * e);
    rhs.samples(k, 0) = rho * V.samples(k, 0);
  }
  rep.lyapunov_check =
      stability::derivative_upper_bound("high_gain_lyapunov", V, rhs, plant.ord);
  finish_report(rep, plant.ord);
  return rep;
}

ObserverReport simulate_lipschitz(const solver::IVP& plant, const ObserverSpec& spec,
                                  const solver::SolveOptions& opts) {
  if (spec.family != Family::Lipschitz) {
    throw std::invalid_argument("simulate_lipschitz: wrong observer family");
  }
  solver::CoupledResult run = solver::integrate_coupled(plant, spec, opts);
  ObserverReport rep;
  rep.P = spec.P;
  rep.Q = spec.Q;
  rep.plant = run.plant.trajectory;
  rep.estimate = run.observer.trajectory;
  for (const auto& w : run.plant.warnings) rep.warnings.push_back(w);
  if (!spec.condition_pass) {
    rep.warnings.push_back("Lipschitz smallness condition failed at design time: " +
                           spec.condition_note);
  }
  if (run.plant.diverged) {
    rep.warnings.push_back("coupled run diverged; report truncated");
    rep.error = rep.plant;
    rep.error.samples -= rep.estimate.samples;
    return rep;
  }
  rep.error = rep.plant;
  rep.error.samples -= rep.estimate.samples;

  // V = (z - z-hat)^T Q (z - z-hat) with z - z-hat = x - x-hat; decay
  // coefficient lambda_min(P) - 2 ||Q|| sup||grad phi3||
  const double decay = linalg::lambda_min_sym(spec.P) -
                       2.0 * linalg::spectral_norm(spec.Q) * spec.sup_grad_phi3;
  common_post(rep, plant.ord, spec.Q, rep.error, decay, "lipschitz_observer_lyapunov");
  finish_report(rep, plant.ord);
  return rep;
}

}  // namespace abfrac::observers
