#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "abfrac/mlf.hpp"
#include "abfrac/solver.hpp"
#include "abfrac/stability.hpp"

using namespace abfrac;
using fracops::FractionalOrder;
using stability::Inequality;

namespace {

Trajectory smooth_scalar(std::uint64_t seed, double t0, double dt, Eigen::Index n,
                         double offset = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.2, 2.5);
  const double a1 = amp(rng), a2 = amp(rng);
  const double w1 = freq(rng), w2 = freq(rng);
  return sample_scalar(t0, dt, n, [=](double t) {
    return offset + a1 * std::sin(w1 * t) + a2 * std::cos(w2 * t);
  });
}

}  // namespace

TEST_CASE("growth_envelope: coefficients and preconditions") {
  FractionalOrder half(0.5, 1.0);
  auto flat = stability::growth_envelope(0.0, 2.5, half);
  CHECK(flat.coeff == doctest::Approx(2.5));
  CHECK(flat.rate == 0.0);
  CHECK(flat(3.0) == doctest::Approx(2.5));

  auto env = stability::growth_envelope(0.5, 1.0, half);
  CHECK(env.coeff == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(env.rate == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(env.power == 1.0);
  CHECK(env(1.0) > env.coeff);  // growing profile

  CHECK_THROWS_AS(stability::growth_envelope(2.1, 1.0, half), std::domain_error);
}

TEST_CASE("growth_envelope contains the solver trajectory (equality case)") {
  const double kappa = 0.5;
  for (double alpha : {0.4, 0.7}) {
    FractionalOrder ord(alpha, 1.0);
    solver::IVP ivp;
    ivp.system = solver::make_linear_system(Eigen::MatrixXd::Constant(1, 1, kappa),
                                            {}, Eigen::MatrixXd::Identity(1, 1));
    ivp.x0 = Eigen::VectorXd::Constant(1, 1.0);
    ivp.ord = ord;
    ivp.T = 1.0;
    ivp.dt = 1e-3;
    auto res = solver::integrate(ivp);
    REQUIRE_FALSE(res.diverged);
    auto env = stability::growth_envelope(kappa, 1.0, ord);
    for (Eigen::Index k = 0; k < res.trajectory.size(); ++k) {
      const double bound = env(res.trajectory.time(k)) * 1.01;
      CHECK(std::fabs(res.trajectory.scalar(k)) <= bound);
    }
  }
}

TEST_CASE("ml_stability_envelope: substitution and limits") {
  FractionalOrder ord(0.5, 1.0);
  stability::LyapunovConditions cond;
  cond.a = cond.b = 1.0;
  cond.alpha1 = cond.alpha2 = 2.0;
  cond.alpha3 = 1.0;
  const double g = cond.gamma(ord);
  auto env = stability::ml_stability_envelope(cond, 3.0, ord);
  CHECK(env.coeff == doctest::Approx(3.0 / (g + 1.0)).epsilon(1e-14));
  CHECK(env.rate == doctest::Approx(cond.kappa0(ord)).epsilon(1e-14));
  CHECK(env.power == 1.0);

  stability::LyapunovConditions tiny = cond;
  tiny.alpha3 = 1e-12;
  auto env0 = stability::ml_stability_envelope(tiny, 3.0, ord);
  CHECK(env0.rate < 1e-11);
  CHECK(env0.coeff == doctest::Approx(3.0).epsilon(1e-10));

  stability::LyapunovConditions bad = cond;
  bad.alpha1 = -1.0;
  CHECK_THROWS_AS(stability::ml_stability_envelope(bad, 1.0, ord), std::domain_error);
}

TEST_CASE("Theorem-2 constant identity kappa3 - kappa0 kappa2") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(0.05, 5.0);
  std::uniform_real_distribution<double> ua(0.05, 0.95);
  for (int rep = 0; rep < 100; ++rep) {
    FractionalOrder ord(ua(rng), pos(rng));
    stability::LyapunovConditions cond;
    cond.a = pos(rng);
    cond.b = pos(rng);
    cond.alpha1 = pos(rng);
    cond.alpha2 = pos(rng);
    cond.alpha3 = pos(rng);
    const double g = cond.gamma(ord);
    const double lhs = cond.kappa3(ord) - cond.kappa0(ord) * cond.kappa2(ord);
    const double rhs = ord.alpha / (ord.b_of_alpha * (g + 1.0) * (g + 1.0));
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
    CHECK(lhs > 0.0);
  }
}

TEST_CASE("envelope monotonicity for positive rates") {
  for (double alpha : {0.3, 0.6, 0.9}) {
    stability::Envelope env{2.0, 1.7, 0.8, alpha};
    double prev = env(0.0);
    for (int k = 1; k <= 300; ++k) {
      const double v = env(0.05 * k);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("check_ml_bound") {
  stability::Envelope env{1.0, 0.8, 1.0, 0.6};
  Trajectory zero = sample_scalar(0.0, 0.01, 200, [](double) { return 0.0; });
  CHECK(stability::check_ml_bound(zero, env).pass);

  Trajectory half = sample_scalar(0.0, 0.01, 200, [&](double t) {
    return 0.5 * env(t);
  });
  auto r = stability::check_ml_bound(half, env);
  CHECK(r.pass);

  Trajectory above = sample_scalar(0.0, 0.01, 200, [&](double t) {
    return 1.1 * env(t);
  });
  auto rf = stability::check_ml_bound(above, env, 1e-2);
  CHECK_FALSE(rf.pass);
  CHECK(rf.worst_margin > 0.0);
}

TEST_CASE("check_comparison") {
  FractionalOrder ord(0.55);
  Trajectory y = smooth_scalar(5, 0.0, 0.02, 120);

  auto same = stability::check_comparison(y, y, ord);
  CHECK(same.report.pass);
  CHECK(same.derivative_dominance);
  CHECK(same.ordering);

  Trajectory x = y;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double t = x.time(k);
    x.samples(k, 0) += t * t;
  }
  auto dom = stability::check_comparison(x, y, ord);
  CHECK(dom.report.pass);
  CHECK(dom.derivative_dominance);
  CHECK(dom.ordering);

  // seeded ramps: y + nonnegative increasing zero-at-t0 terms
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> c(0.1, 2.0);
  int consistent = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Trajectory base = smooth_scalar(900 + rep, 0.0, 0.02, 90);
    Trajectory lift = base;
    const double c2 = c(rng), c3 = c(rng);
    for (Eigen::Index k = 0; k < lift.size(); ++k) {
      const double t = lift.time(k);
      lift.samples(k, 0) += c2 * t * t + c3 * t * t * t;
    }
    auto rep2 = stability::check_comparison(lift, base, ord);
    if (rep2.report.pass && rep2.derivative_dominance && rep2.ordering) ++consistent;
  }
  CHECK(consistent == 100);
}

TEST_CASE("lyapunov_monitor") {
  FractionalOrder ord(0.6);
  // x = 0 with V = 0 passes vacuously
  Trajectory x0 = sample_scalar(0.0, 0.02, 100, [](double) { return 0.0; });
  Trajectory v0 = x0;
  CHECK(stability::lyapunov_monitor(v0, x0, {1.0, 2.0}, ord).pass);

  // constant V with nonzero x violates ABC-D V <= -gamma3(||x||)
  Trajectory x1 = sample_scalar(0.0, 0.02, 100, [](double) { return 1.0; });
  Trajectory v1 = sample_scalar(0.0, 0.02, 100, [](double) { return 2.0; });
  auto r = stability::lyapunov_monitor(v1, x1, {1.0, 2.0}, ord);
  CHECK_FALSE(r.pass);
  CHECK(r.input_ok);

  Trajectory vneg = sample_scalar(0.0, 0.02, 100, [](double t) { return -t; });
  CHECK_FALSE(stability::lyapunov_monitor(vneg, x1, {1.0, 2.0}, ord).input_ok);
}

TEST_CASE("inequality_suite: constructed cases") {
  FractionalOrder ord(0.5);
  const Eigen::Index n = 120;
  const double dt = 0.01;
  Trajectory none;

  Trajectory lin = sample_scalar(0.0, dt, n, [](double t) { return t; });
  auto e36 = stability::inequality_suite(none, lin, std::nullopt, ord,
                                         Inequality::E36);
  CHECK(e36.pass);
  CHECK(e36.input_ok);

  Trajectory c = sample_scalar(0.0, dt, n, [](double) { return 1.3; });
  auto e36c = stability::inequality_suite(none, c, std::nullopt, ord,
                                          Inequality::E36);
  CHECK(e36c.pass);
  CHECK(std::fabs(e36c.worst_margin) <= e36c.tol);  // equality: both sides zero

  Trajectory dec = sample_scalar(0.0, dt, n, [](double t) { return std::exp(-t); });
  Trajectory inc = sample_scalar(0.0, dt, n, [](double t) { return 1.0 + t; });
  Trajectory pos = sample_scalar(0.0, dt, n,
                                 [](double t) { return 0.5 + 0.3 * std::sin(t) + 0.3; });

  CHECK(stability::inequality_suite(dec, pos, std::nullopt, ord, Inequality::E38).pass);
  CHECK(stability::inequality_suite(inc, pos, std::nullopt, ord, Inequality::E39).pass);
  CHECK(stability::inequality_suite(dec, pos, std::nullopt, ord, Inequality::E41).pass);

  // monotonicity violation is an input error, not a failed check
  auto bad = stability::inequality_suite(inc, pos, std::nullopt, ord, Inequality::E38);
  CHECK_FALSE(bad.input_ok);

  // vector variants
  Trajectory phi_vec = sample_signal(0.0, dt, n, [](double t) {
    return Eigen::Vector2d(std::exp(-t), 2.0 / (1.0 + t));
  });
  Trajectory x_vec = sample_signal(0.0, dt, n, [](double t) {
    return Eigen::Vector2d(1.0 + 0.5 * std::sin(t), 0.7 + 0.2 * std::cos(2 * t));
  });
  CHECK(stability::inequality_suite(phi_vec, x_vec, std::nullopt, ord,
                                    Inequality::E40)
            .pass);

  Eigen::Matrix2d P;
  P << 2.0, 0.3, 0.3, 1.0;
  Trajectory xy = sample_signal(0.0, dt, n, [](double t) {
    return Eigen::Vector2d(std::sin(t), std::cos(t));
  });
  CHECK(stability::inequality_suite(none, xy, P, ord, Inequality::E43).pass);
  CHECK(stability::inequality_suite(dec, xy, P, ord, Inequality::E42).pass);

  Eigen::Matrix2d notpd;
  notpd << 1.0, 0.0, 0.0, -1.0;
  CHECK_FALSE(stability::inequality_suite(none, xy, notpd, ord, Inequality::E43)
                  .input_ok);
}

TEST_CASE("inequality_suite: E36 property sweep over seeds and orders") {
  for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
    FractionalOrder ord(alpha);
    int passed = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Trajectory x = smooth_scalar(seed, 0.0, 0.02, 80);
      auto r = stability::inequality_suite({}, x, std::nullopt, ord, Inequality::E36);
      if (r.pass) ++passed;
    }
    CHECK(passed == 100);
  }
}
