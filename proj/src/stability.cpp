#include "abfrac/stability.hpp"

#include <cmath>

#include "abfrac/linalg.hpp"
#include "abfrac/mlf.hpp"

namespace abfrac::stability {

namespace {

double scale_of(const Trajectory& t) {
  if (t.samples.size() == 0) return 1.0;
  return std::max(1.0, t.samples.cwiseAbs().maxCoeff());
}

// worst (most positive) value of lhs - rhs over the grid, with its time
struct WorstGap {
  double gap = -std::numeric_limits<double>::infinity();
  double time = 0.0;
};

WorstGap worst_gap(const Trajectory& lhs, const Trajectory& rhs) {
  WorstGap w;
  for (Eigen::Index k = 0; k < lhs.size(); ++k) {
    const double g = lhs.scalar(k) - rhs.scalar(k);
    if (g > w.gap) {
      w.gap = g;
      w.time = lhs.time(k);
    }
  }
  return w;
}

bool nondecreasing(const Trajectory& t, double slack) {
  for (Eigen::Index k = 0; k + 1 < t.size(); ++k) {
    for (Eigen::Index j = 0; j < t.dim(); ++j) {
      if (t.samples(k + 1, j) < t.samples(k, j) - slack) return false;
    }
  }
  return true;
}

bool nonincreasing(const Trajectory& t, double slack) {
  for (Eigen::Index k = 0; k + 1 < t.size(); ++k) {
    for (Eigen::Index j = 0; j < t.dim(); ++j) {
      if (t.samples(k + 1, j) > t.samples(k, j) + slack) return false;
    }
  }
  return true;
}

bool nonnegative(const Trajectory& t, double slack) {
  return t.samples.minCoeff() >= -slack;
}

Trajectory scalar_like(const Trajectory& ref) {
  Trajectory out;
  out.t0 = ref.t0;
  out.dt = ref.dt;
  out.samples = Eigen::MatrixXd::Zero(ref.size(), 1);
  return out;
}

}  // namespace

double Envelope::operator()(double t) const {
  if (coeff == 0.0) return 0.0;
  const double e = mlf::ml_one(alpha, -rate * std::pow(std::max(t, 0.0), alpha));
  return coeff * std::pow(e, power);
}

double ClassK::operator()(double s) const { return c * std::pow(s, p); }

Envelope growth_envelope(double kappa, double x0_norm,
                         const fracops::FractionalOrder& ord) {
  const double B = ord.b_of_alpha;
  const double denom = B - kappa * (1.0 - ord.alpha);
  if (!(denom > 0.0)) {
    throw std::domain_error(
        "growth_envelope: bound inapplicable, B(alpha) <= kappa (1 - alpha)");
  }
  Envelope env;
  env.coeff = B / denom * x0_norm;
  env.rate = -kappa * ord.alpha / denom;  // negative: growing profile
  env.power = 1.0;
  env.alpha = ord.alpha;
  return env;
}

Envelope ml_stability_envelope(const LyapunovConditions& cond, double x0_norm,
                               const fracops::FractionalOrder& ord) {
  if (!(cond.a > 0.0) || !(cond.b > 0.0) || !(cond.alpha1 > 0.0) ||
      !(cond.alpha2 > 0.0) || !(cond.alpha3 > 0.0)) {
    throw std::domain_error("ml_stability_envelope: constants must be positive");
  }
  const double g = cond.gamma(ord);
  Envelope env;
  env.coeff = std::pow(
      cond.alpha2 / (cond.alpha1 * (g + 1.0)) * std::pow(x0_norm, cond.a * cond.b),
      1.0 / cond.a);
  env.rate = cond.kappa0(ord);
  env.power = 1.0 / cond.a;
  env.alpha = ord.alpha;
  return env;
}

CheckReport check_ml_bound(const Trajectory& err, const Envelope& env, double tol) {
  require_grid(err);
  CheckReport r;
  r.check = "ml_bound";
  r.tol = tol;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < err.size(); ++k) {
    const double e = err.samples.row(k).norm();
    const double bound = env(err.time(k) - err.t0) * (1.0 + tol);
    const double gap = e - bound;
    if (gap > r.worst_margin) {
      r.worst_margin = gap;
      r.worst_time = err.time(k);
    }
  }
  r.pass = r.worst_margin <= 0.0;
  return r;
}

ComparisonReport check_comparison(const Trajectory& x, const Trajectory& y,
                                  const fracops::FractionalOrder& ord) {
  ComparisonReport out;
  out.report.check = "comparison_lemma";
  if (x.dim() != 1 || y.dim() != 1) {
    out.report.input_ok = false;
    out.report.detail = "requires scalar trajectories";
    return out;
  }
  if (!x.same_grid(y)) {
    out.report.input_ok = false;
    out.report.detail = "grid mismatch";
    return out;
  }
  const auto margins = [&](const Trajectory& xs, const Trajectory& ys) {
    const Trajectory dx = fracops::abc_derivative(xs, ord);
    const Trajectory dy = fracops::abc_derivative(ys, ord);
    return std::pair<double, double>{worst_gap(dy, dx).gap, worst_gap(ys, xs).gap};
  };
  const auto [dom_fine, ord_fine] = margins(x, y);
  const auto [dom_coarse, ord_coarse] = margins(decimate(x, 2), decimate(y, 2));
  const double est = std::max(std::fabs(dom_fine - dom_coarse),
                              std::fabs(ord_fine - ord_coarse)) /
                     3.0;
  const double tol = std::max(1e-8, 10.0 * est);
  if (std::fabs(x.scalar(0) - y.scalar(0)) > tol) {
    out.report.input_ok = false;
    out.report.detail = "x(t0) != y(t0)";
    return out;
  }
  out.report.tol = tol;
  out.derivative_dominance = dom_fine <= tol;  // ABC-D x >= ABC-D y everywhere
  out.ordering = ord_fine <= tol;              // x >= y everywhere
  out.report.worst_margin = ord_fine;
  out.report.worst_time = x.t_end();
  // the lemma is refuted only by dominance without ordering
  out.report.pass = !out.derivative_dominance || out.ordering;
  char buf[128];
  std::snprintf(buf, sizeof buf, "dominance=%d ordering=%d",
                int(out.derivative_dominance), int(out.ordering));
  out.report.detail = buf;
  return out;
}

CheckReport derivative_upper_bound(const std::string& name, const Trajectory& v,
                                   const Trajectory& rhs,
                                   const fracops::FractionalOrder& ord, bool use_abr) {
  CheckReport r;
  r.check = name;
  if (!v.same_grid(rhs) || v.dim() != 1 || rhs.dim() != 1) {
    r.input_ok = false;
    r.detail = "grid/shape mismatch";
    return r;
  }
  const auto margin = [&](const Trajectory& vs, const Trajectory& rs) {
    const Trajectory d =
        use_abr ? fracops::abr_derivative(vs, ord) : fracops::abc_derivative(vs, ord);
    return worst_gap(d, rs);
  };
  const WorstGap fine = margin(v, rhs);
  const WorstGap coarse = margin(decimate(v, 2), decimate(rhs, 2));
  const double est = std::fabs(fine.gap - coarse.gap) / 3.0;
  r.tol = std::max(1e-8, 10.0 * est);
  r.worst_margin = fine.gap;
  r.worst_time = fine.time;
  r.pass = fine.gap <= r.tol;
  return r;
}

CheckReport lyapunov_monitor(const Trajectory& v_values, const Trajectory& x,
                             const ClassK& gamma3,
                             const fracops::FractionalOrder& ord) {
  CheckReport r;
  r.check = "lyapunov_monitor";
  if (v_values.dim() != 1 || !v_values.same_grid(x)) {
    r.input_ok = false;
    r.detail = "V must be scalar on the state grid";
    return r;
  }
  if (v_values.samples.minCoeff() < 0.0) {
    r.input_ok = false;
    r.detail = "negative V sample";
    return r;
  }
  if (!(gamma3.c > 0.0) || !(gamma3.p > 0.0)) {
    r.input_ok = false;
    r.detail = "class-K catalog requires c, p > 0";
    return r;
  }
  Trajectory rhs = scalar_like(x);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    rhs.samples(k, 0) = -gamma3(x.samples.row(k).norm());
  }
  CheckReport inner = derivative_upper_bound("lyapunov_monitor", v_values, rhs, ord);
  inner.check = "lyapunov_monitor";
  return inner;
}

const char* inequality_name(Inequality which) {
  switch (which) {
    case Inequality::E36: return "E36_half_square";
    case Inequality::E38: return "E38_decreasing_weight";
    case Inequality::E39: return "E39_increasing_weight";
    case Inequality::E40: return "E40_vector_weight";
    case Inequality::E41: return "E41_weighted_square";
    case Inequality::E42: return "E42_weighted_quadratic_form";
    case Inequality::E43: return "E43_quadratic_form";
  }
  return "?";
}

CheckReport inequality_suite(const Trajectory& phi, const Trajectory& x,
                             const std::optional<Eigen::MatrixXd>& P,
                             const fracops::FractionalOrder& ord, Inequality which) {
  CheckReport r;
  r.check = inequality_name(which);
  const double slack_phi = 1e-12 * scale_of(phi);
  const double slack_x = 1e-12 * scale_of(x);

  const bool needs_P =
      which == Inequality::E42 || which == Inequality::E43;
  Eigen::MatrixXd Pm;
  if (needs_P) {
    if (!P || !linalg::is_symmetric(*P) || !linalg::is_positive_definite(*P)) {
      r.input_ok = false;
      r.detail = "P must be a symmetric positive definite matrix";
      return r;
    }
    Pm = *P;
    if (Pm.rows() != x.dim()) {
      r.input_ok = false;
      r.detail = "P dimension mismatch";
      return r;
    }
  }

  // precondition screening on the samples
  switch (which) {
    case Inequality::E36:
      if (x.dim() != 1) {
        r.input_ok = false;
        r.detail = "E36 needs scalar x";
        return r;
      }
      break;
    case Inequality::E38:
    case Inequality::E39: {
      const bool mono = which == Inequality::E38 ? nonincreasing(phi, slack_phi)
                                                 : nondecreasing(phi, slack_phi);
      if (phi.dim() != 1 || x.dim() != 1 || !phi.same_grid(x)) {
        r.input_ok = false;
        r.detail = "scalar phi and x on one grid required";
        return r;
      }
      if (!mono) {
        r.input_ok = false;
        r.detail = "phi violates the required monotonicity on the samples";
        return r;
      }
      if (!nonnegative(x, slack_x)) {
        r.input_ok = false;
        r.detail = "x must be non-negative";
        return r;
      }
      break;
    }
    case Inequality::E40:
      if (phi.dim() != x.dim() || !phi.same_grid(x)) {
        r.input_ok = false;
        r.detail = "phi and x must share dimension and grid";
        return r;
      }
      if (!nonincreasing(phi, slack_phi)) {
        r.input_ok = false;
        r.detail = "phi must be componentwise non-increasing";
        return r;
      }
      if (!nonnegative(x, slack_x)) {
        r.input_ok = false;
        r.detail = "x must be componentwise non-negative";
        return r;
      }
      break;
    case Inequality::E41:
    case Inequality::E42:
      if (phi.dim() != 1 || !phi.same_grid(x)) {
        r.input_ok = false;
        r.detail = "scalar phi on the x grid required";
        return r;
      }
      if (which == Inequality::E41 && x.dim() != 1) {
        r.input_ok = false;
        r.detail = "E41 needs scalar x";
        return r;
      }
      if (!nonincreasing(phi, slack_phi) || !nonnegative(phi, slack_phi)) {
        r.input_ok = false;
        r.detail = "phi must be non-negative and non-increasing";
        return r;
      }
      break;
    case Inequality::E43:
      break;
  }

  // lhs/rhs evaluation shared by the fine and coarsened grids
  const auto margin = [&](const Trajectory& ph, const Trajectory& xs) -> WorstGap {
    Trajectory combined = scalar_like(xs);
    Trajectory rhs = scalar_like(xs);
    const Trajectory dx = fracops::abc_derivative(xs, ord);
    switch (which) {
      case Inequality::E36:
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
          combined.samples(k, 0) = xs.scalar(k) * xs.scalar(k);
          rhs.samples(k, 0) = xs.scalar(k) * dx.scalar(k);
        }
        combined.samples = 0.5 * fracops::abc_derivative(combined, ord).samples;
        return worst_gap(combined, rhs);
      case Inequality::E38:
      case Inequality::E39:
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
          combined.samples(k, 0) = ph.scalar(k) * xs.scalar(k);
          rhs.samples(k, 0) = ph.scalar(k) * dx.scalar(k);
        }
        combined.samples = fracops::abc_derivative(combined, ord).samples;
        if (which == Inequality::E39) {
          combined.samples = -combined.samples;
          rhs.samples = -rhs.samples;
        }
        return worst_gap(combined, rhs);
      case Inequality::E40:
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
          combined.samples(k, 0) = ph.samples.row(k).dot(xs.samples.row(k));
          rhs.samples(k, 0) = ph.samples.row(k).dot(dx.samples.row(k));
        }
        combined.samples = fracops::abc_derivative(combined, ord).samples;
        return worst_gap(combined, rhs);
      case Inequality::E41:
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
          combined.samples(k, 0) = ph.scalar(k) * xs.scalar(k) * xs.scalar(k);
          rhs.samples(k, 0) = 2.0 * ph.scalar(k) * xs.scalar(k) * dx.scalar(k);
        }
        combined.samples = fracops::abc_derivative(combined, ord).samples;
        return worst_gap(combined, rhs);
      case Inequality::E42:
      case Inequality::E43:
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
          const Eigen::VectorXd xv = xs.samples.row(k).transpose();
          const Eigen::VectorXd dv = dx.samples.row(k).transpose();
          const double w = which == Inequality::E42 ? ph.scalar(k) : 1.0;
          combined.samples(k, 0) = w * xv.dot(Pm * xv);
          rhs.samples(k, 0) = 2.0 * w * xv.dot(Pm * dv);
        }
        combined.samples = fracops::abc_derivative(combined, ord).samples;
        return worst_gap(combined, rhs);
    }
    return {};
  };

  const WorstGap fine = margin(phi, x);
  const WorstGap coarse = margin(decimate(phi, 2), decimate(x, 2));
  const double est = std::fabs(fine.gap - coarse.gap) / 3.0;
  r.tol = std::max(1e-8, 10.0 * est);
  r.worst_margin = fine.gap;
  r.worst_time = fine.time;
  r.pass = fine.gap <= r.tol;
  return r;
}

}  // namespace abfrac::stability
