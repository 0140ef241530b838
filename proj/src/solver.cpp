#include "abfrac/solver.hpp"

#include <cmath>

#include "abfrac/mlf.hpp"

namespace abfrac::solver {

namespace {

Eigen::VectorXd empty_vec() { return Eigen::VectorXd(); }

// Damped Newton on g(x) = x - base - c f(t, x) with a finite-difference
// Jacobian. State dimensions here are small, so the O(d) extra evaluations
// per iteration are cheap; plain fixed-point substitution is not an option
// because c * Lip(f) exceeds 1 for the stiffer benchmark orders.
class NewtonLocalSolve {
 public:
  NewtonLocalSolve(const Rhs& f, double tol, int max_iter)
      : f_(f), tol_(tol), max_iter_(max_iter) {}

  Eigen::VectorXd operator()(double t, double c, const Eigen::VectorXd& base,
                             const Eigen::VectorXd& seed) const {
    const Eigen::Index d = base.size();
    Eigen::VectorXd x = seed;
    if (!x.allFinite()) x = base;
    const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
    for (int it = 0; it < max_iter_; ++it) {
      Eigen::VectorXd fx = f_(t, x);
      if (!fx.allFinite()) return fx;
      Eigen::VectorXd g = x - base - c * fx;
      if (g.cwiseAbs().maxCoeff() <= tol_ * scale) return x;
      Eigen::MatrixXd J = Eigen::MatrixXd::Identity(d, d);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double h = 1e-7 * std::max(1.0, std::fabs(x(j)));
        Eigen::VectorXd xp = x;
        xp(j) += h;
        Eigen::VectorXd fp = f_(t, xp);
        if (!fp.allFinite()) return fp;
        J.col(j) -= (c / h) * (fp - fx);
      }
      Eigen::VectorXd step = J.partialPivLu().solve(g);
      if (!step.allFinite()) return step;
      x -= step;
    }
    return x;
  }

 private:
  const Rhs& f_;
  double tol_;
  int max_iter_;
};

// Knot sequence: a mesh graded like (j/M)^(2/alpha) over the startup
// window, merged with the main nodes it overlaps, then the uniform tail.
// Main nodes appear exactly; `main_at[k]` is the knot index of node k.
struct KnotMesh {
  std::vector<double> tau;
  std::vector<Eigen::Index> main_at;
};

KnotMesh build_mesh(double t0, double dt, Eigen::Index n_main, double alpha,
                    const SolveOptions& opts) {
  KnotMesh mesh;
  const double horizon = dt * static_cast<double>(n_main - 1);
  double window = opts.graded_fraction * horizon;
  const double r = 2.0 / alpha;
  auto m_graded = static_cast<Eigen::Index>(std::ceil(r * window / dt));
  const auto budget = static_cast<Eigen::Index>(
      opts.graded_budget * static_cast<double>(n_main));
  if (m_graded > budget) m_graded = budget;
  if (opts.graded_fraction <= 0.0) m_graded = 0;

  std::vector<double> offsets;  // knot offsets from t0, strictly increasing
  offsets.push_back(0.0);
  const double min_gap = std::max(1e-13 * dt, 16.0 * std::numeric_limits<double>::epsilon() *
                                                  (std::fabs(t0) + horizon));
  Eigen::Index next_main = 1;
  mesh.main_at.assign(n_main, 0);
  auto push = [&](double off, bool is_main) {
    if (off - offsets.back() < min_gap) {
      if (is_main) {
        // collapse onto the previous knot rather than create a degenerate cell
        offsets.back() = off;
        mesh.main_at[next_main] = static_cast<Eigen::Index>(offsets.size()) - 1;
      }
      return;
    }
    offsets.push_back(off);
    if (is_main) {
      mesh.main_at[next_main] = static_cast<Eigen::Index>(offsets.size()) - 1;
    }
  };
  for (Eigen::Index j = 1; j <= m_graded; ++j) {
    const double off =
        window * std::pow(static_cast<double>(j) / static_cast<double>(m_graded), r);
    while (next_main < n_main &&
           static_cast<double>(next_main) * dt <= off + 0.5 * min_gap) {
      push(static_cast<double>(next_main) * dt, true);
      ++next_main;
    }
    if (std::fabs(off - offsets.back()) < min_gap) continue;
    push(off, false);
  }
  while (next_main < n_main) {
    push(static_cast<double>(next_main) * dt, true);
    ++next_main;
  }
  mesh.tau.resize(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) mesh.tau[i] = t0 + offsets[i];
  return mesh;
}

}  // namespace

Eigen::Index SystemDef::state_dim() const {
  return type == Type::Linear ? A.rows() : f.size();
}

Eigen::Index SystemDef::input_dim() const { return input.size(); }

Eigen::Index SystemDef::output_dim() const {
  return type == Type::Linear ? C.rows() : h.size();
}

Eigen::VectorXd SystemDef::input_at(double t) const {
  if (input.size() == 0) return empty_vec();
  return sysdsl::eval_field(input, empty_vec(), empty_vec(), t);
}

Eigen::VectorXd SystemDef::rhs(double t, const Eigen::VectorXd& x) const {
  if (type == Type::Linear) {
    Eigen::VectorXd v = A * x;
    if (B.size() > 0 && input.size() > 0) v += B * input_at(t);
    return v;
  }
  return sysdsl::eval_field(f, x, input_at(t), t);
}

Eigen::VectorXd SystemDef::output(double t, const Eigen::VectorXd& x) const {
  if (type == Type::Linear) return C * x;
  return sysdsl::eval_field(h, x, input_at(t), t);
}

SystemDef make_linear_system(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                             sysdsl::VectorField input) {
  if (A.rows() != A.cols()) throw std::invalid_argument("system: A must be square");
  if (C.size() > 0 && C.cols() != A.rows()) {
    throw std::invalid_argument("system: C column count must match the state dim");
  }
  if (B.size() > 0 && B.rows() != A.rows()) {
    throw std::invalid_argument("system: B row count must match the state dim");
  }
  if (B.size() > 0 && input.size() > 0 && B.cols() != input.size()) {
    throw std::invalid_argument("system: B column count must match the input dim");
  }
  SystemDef s;
  s.type = SystemDef::Type::Linear;
  s.A = std::move(A);
  s.B = std::move(B);
  s.C = std::move(C);
  s.input = std::move(input);
  return s;
}

SystemDef make_expression_system(sysdsl::VectorField f, sysdsl::VectorField h,
                                 sysdsl::VectorField input) {
  if (f.size() == 0) throw std::invalid_argument("system: empty vector field");
  if (f.dims.n_states != static_cast<int>(f.size())) {
    throw std::invalid_argument("system: field arity must equal the declared n");
  }
  SystemDef s;
  s.type = SystemDef::Type::Expression;
  s.f = std::move(f);
  s.h = std::move(h);
  s.input = std::move(input);
  return s;
}

SolveResult integrate_rhs(const Rhs& f, const Eigen::VectorXd& x0,
                          const fracops::FractionalOrder& ord, double t0, double dt,
                          Eigen::Index n_main, const SolveOptions& opts,
                          const LocalSolve& local_solve) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (n_main < 2) throw std::invalid_argument("integrate: need at least 2 grid points");
  const double alpha = ord.alpha;
  const double B = ord.b_of_alpha;
  const double local_c = (1.0 - alpha) / B;
  const double hist_c = alpha / (B * mlf::gamma_fn(alpha));
  const Eigen::Index dim = x0.size();

  const NewtonLocalSolve newton(f, opts.corrector_tol, opts.corrector_max_iter);
  const LocalSolve& solve_local = local_solve ? local_solve : LocalSolve(newton);

  const KnotMesh mesh = build_mesh(t0, dt, n_main, alpha, opts);
  const auto n_knots = static_cast<Eigen::Index>(mesh.tau.size());

  SolveResult res;
  res.trajectory.t0 = t0;
  res.trajectory.dt = dt;
  res.trajectory.samples.resize(n_main, dim);
  res.trajectory.samples.row(0) = x0.transpose();

  if (std::pow(dt, alpha) * ord.kernel_rate() > 0.5) {
    res.warnings.push_back(
        "dt may be too coarse for the Mittag-Leffler kernel: dt^alpha * "
        "alpha/(1-alpha) > 0.5");
  }

  // The AB fixed-point form forces x(t0+) = x0 + (1-a)/B f(t0, x(t0+)); the
  // stored trajectory keeps the supplied x0 while the f-history starts from
  // the resolved limit, which is the branch the quadrature must see.
  const Eigen::VectorXd x0p = solve_local(t0, local_c, x0, x0);
  if (!x0p.allFinite()) {
    res.diverged = true;
    res.last_valid = 0;
    res.trajectory.samples.conservativeResize(1, dim);
    return res;
  }

  std::vector<Eigen::VectorXd> fh(n_knots);
  fh[0] = f(t0, x0p);
  if (!fh[0].allFinite()) {
    res.diverged = true;
    res.last_valid = 0;
    res.trajectory.samples.conservativeResize(1, dim);
    return res;
  }

  Eigen::VectorXd q_rect(dim), base(dim), x_prev = x0p;
  bool diverged = false;
  Eigen::Index last_main = 0;
  Eigen::Index next_main = 1;

  for (Eigen::Index i = 1; i < n_knots && !diverged; ++i) {
    const double ti = mesh.tau[i];
    // One pass over the history cells accumulates the rectangle predictor
    // and the trapezoid weights; the last cell's right endpoint is the
    // unknown, so its weight moves into the implicit coefficient.
    q_rect.setZero();
    base.setZero();
    double w_last_right = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double s1 = ti - mesh.tau[j];
      const double s0 = ti - mesh.tau[j + 1];
      const double width = mesh.tau[j + 1] - mesh.tau[j];
      double m0, m1;  // cell kernel moments against {1, (tau - tau_j)/width}
      if (width < 1e-4 * s0) {
        // Thin cell far from the target: the closed-form moments cancel
        // catastrophically (difference of nearly equal powers divided by the
        // width), while the kernel is locally smooth, so a midpoint
        // expansion is accurate to O((width/s0)^3) and stable.
        const double sm = 0.5 * (s0 + s1);
        const double km = std::pow(sm, alpha - 1.0);
        const double kd = (alpha - 1.0) * km / sm;
        m0 = km * width;
        m1 = 0.5 * width * km - kd * width * width / 12.0;
      } else {
        const double p1 = std::pow(s1, alpha);
        const double p0 = s0 > 0.0 ? std::pow(s0, alpha) : 0.0;
        m0 = (p1 - p0) / alpha;
        m1 = (s1 * m0 - (p1 * s1 - p0 * s0) / (alpha + 1.0)) / width;
      }
      q_rect.noalias() += m0 * fh[j];
      base.noalias() += (m0 - m1) * fh[j];
      if (j + 1 < i) {
        base.noalias() += m1 * fh[j + 1];
      } else {
        w_last_right = m1;
      }
    }
    const double c_eff = local_c + hist_c * w_last_right;
    base = x0 + hist_c * base;

    // rectangle predictor with one local fixed-point substitution seeds
    // the implicit trapezoid solve
    Eigen::VectorXd seed = x0 + hist_c * q_rect + local_c * fh[i - 1];
    seed = x0 + hist_c * q_rect + local_c * f(ti, seed);
    if (!seed.allFinite()) seed = x_prev;

    Eigen::VectorXd xi = solve_local(ti, c_eff, base, seed);
    if (xi.allFinite()) {
      fh[i] = f(ti, xi);
      if (!fh[i].allFinite()) diverged = true;
    } else {
      diverged = true;
    }
    if (diverged) break;
    x_prev = xi;
    if (i == mesh.main_at[next_main]) {
      res.trajectory.samples.row(next_main) = xi.transpose();
      last_main = next_main;
      if (opts.progress) opts.progress(next_main, ti);
      ++next_main;
      if (next_main >= n_main) break;
    }
  }

  res.last_valid = last_main;
  res.diverged = diverged;
  if (diverged) {
    res.trajectory.samples.conservativeResize(last_main + 1, dim);
  }
  return res;
}

namespace {

LocalSolve linear_local_solve(const SystemDef& sys) {
  return [&sys](double t, double c, const Eigen::VectorXd& base,
                const Eigen::VectorXd&) -> Eigen::VectorXd {
    const Eigen::Index d = sys.A.rows();
    Eigen::VectorXd rhs = base;
    if (sys.B.size() > 0 && sys.input.size() > 0) {
      rhs += c * (sys.B * sys.input_at(t));
    }
    return (Eigen::MatrixXd::Identity(d, d) - c * sys.A).partialPivLu().solve(rhs);
  };
}

}  // namespace

SolveResult integrate(const IVP& ivp, const SolveOptions& opts) {
  if (!(ivp.T > ivp.t0)) throw std::invalid_argument("integrate: T must exceed t0");
  if (ivp.x0.size() != ivp.system.state_dim()) {
    throw std::invalid_argument("integrate: x0 does not match the state dimension");
  }
  const auto n_main =
      static_cast<Eigen::Index>(std::llround((ivp.T - ivp.t0) / ivp.dt)) + 1;
  LocalSolve local;
  if (ivp.system.type == SystemDef::Type::Linear) {
    local = linear_local_solve(ivp.system);
  }
  SolveResult res = integrate_rhs(
      [&](double t, const Eigen::VectorXd& x) { return ivp.system.rhs(t, x); },
      ivp.x0, ivp.ord, ivp.t0, ivp.dt, std::max<Eigen::Index>(n_main, 2), opts, local);
  if (ivp.lipschitz_kappa) {
    const double k = *ivp.lipschitz_kappa;
    if (ivp.ord.b_of_alpha <= k * (1.0 - ivp.ord.alpha)) {
      res.warnings.push_back(
          "Theorem-1 growth bound inapplicable: B(alpha) <= kappa (1 - alpha)");
    }
  }
  return res;
}

}  // namespace abfrac::solver
