#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "abfrac/observers.hpp"

using namespace abfrac;
using fracops::FractionalOrder;

namespace {

Eigen::Matrix2d double_integrator() {
  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  return A;
}

Eigen::MatrixXd row(std::initializer_list<double> v) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) m(0, i++) = d;
  return m;
}

Eigen::MatrixXd col(std::initializer_list<double> v) {
  return row(v).transpose();
}

solver::IVP double_integrator_plant(double alpha, double T, double dt) {
  solver::IVP ivp;
  ivp.system = solver::make_linear_system(double_integrator(), {}, row({1, 0}));
  ivp.x0 = Eigen::Vector2d(1.0, 0.0);
  ivp.ord = FractionalOrder(alpha, 1.0);
  ivp.T = T;
  ivp.dt = dt;
  return ivp;
}

}  // namespace

TEST_CASE("design_linear: explicit gain on the double integrator") {
  auto spec = observers::design_linear(double_integrator(), row({1, 0}),
                                       Eigen::MatrixXd(col({2, 1})),
                                       Eigen::Matrix2d::Identity());
  const Eigen::Matrix2d Abar = spec.A - spec.K * spec.C;
  const Eigen::VectorXcd ev = linalg::eigenvalues(Abar);
  CHECK(ev(0).real() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(ev(1).real() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(linalg::is_positive_definite(spec.P));
}

TEST_CASE("design_linear: open loop is valid when A is already Hurwitz") {
  Eigen::Matrix2d A = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
  auto spec = observers::design_linear(A, row({1, 1}),
                                       Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 1)),
                                       Eigen::Matrix2d::Identity());
  CHECK(spec.K.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("design_linear: rejects unobservable pairs and bad gains") {
  CHECK_THROWS_AS(observers::design_linear(Eigen::Matrix2d::Identity(), row({1, 0}),
                                           1.0, Eigen::Matrix2d::Identity()),
                  std::invalid_argument);
  // K = 0 with an unstable A fails the stabilization check
  CHECK_THROWS_AS(observers::design_linear(double_integrator(), row({1, 0}),
                                           Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 1)),
                                           Eigen::Matrix2d::Identity()),
                  std::invalid_argument);
}

TEST_CASE("design_linear: automatic shift placement stabilizes") {
  auto spec = observers::design_linear(double_integrator(), row({1, 0}), 1.0,
                                       Eigen::Matrix2d::Identity());
  CHECK(linalg::is_hurwitz(spec.A - spec.K * spec.C).hurwitz);
  CHECK(linalg::is_positive_definite(spec.P));
  // sigma below the spectral requirement is rejected
  Eigen::Matrix2d unstable = Eigen::Vector2d(2.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(observers::design_linear(unstable, row({1, 1}), 1.0,
                                           Eigen::Matrix2d::Identity()),
                  std::invalid_argument);
}

TEST_CASE("simulate_linear: double integrator behaves per the error dynamics") {
  auto spec = observers::design_linear(double_integrator(), row({1, 0}),
                                       Eigen::MatrixXd(col({2, 1})),
                                       Eigen::Matrix2d::Identity());
  spec.xhat0 = Eigen::Vector2d::Zero();
  auto plant = double_integrator_plant(0.7, 20.0, 0.01);
  auto rep = observers::simulate_linear(plant, spec);
  REQUIRE(rep.error.size() > 0);
  CHECK(rep.error_dynamics_check.pass);
  CHECK(rep.error_dynamics_check.worst_margin <= 1e-8);
  CHECK(rep.envelope_check.pass);
  CHECK(rep.lyapunov_check.pass);
  const double e0 = rep.error.state(0).norm();
  const double eT = rep.error.state(rep.error.size() - 1).norm();
  CHECK(eT < e0);
  CHECK(rep.verdict);
}

TEST_CASE("simulate_linear: matching initial estimate keeps zero error") {
  auto spec = observers::design_linear(double_integrator(), row({1, 0}),
                                       Eigen::MatrixXd(col({2, 1})),
                                       Eigen::Matrix2d::Identity());
  spec.xhat0 = Eigen::Vector2d(1.0, 0.0);
  auto plant = double_integrator_plant(0.7, 5.0, 0.01);
  auto rep = observers::simulate_linear(plant, spec);
  CHECK(rep.error.samples.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(rep.verdict);
}

TEST_CASE("simulate_linear: the error ignores the control input") {
  auto spec = observers::design_linear(double_integrator(), row({1, 0}),
                                       Eigen::MatrixXd(col({2, 1})),
                                       Eigen::Matrix2d::Identity());
  spec.xhat0 = Eigen::Vector2d::Zero();

  auto plant0 = double_integrator_plant(0.6, 5.0, 0.01);
  auto rep0 = observers::simulate_linear(plant0, spec);

  solver::IVP plant1 = plant0;
  sysdsl::VectorField u = sysdsl::parse_field({"sin(t)"}, {0, 0});
  plant1.system = solver::make_linear_system(double_integrator(), col({0, 1}),
                                             row({1, 0}), u);
  auto rep1 = observers::simulate_linear(plant1, spec);

  CHECK((rep0.error.samples - rep1.error.samples).cwiseAbs().maxCoeff() <= 1e-8);
  // while the plant states themselves differ
  CHECK((rep0.plant.samples - rep1.plant.samples).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("simulate_linear: scaling Q leaves the error trajectory unchanged") {
  auto s1 = observers::design_linear(double_integrator(), row({1, 0}),
                                     Eigen::MatrixXd(col({2, 1})),
                                     Eigen::Matrix2d::Identity());
  auto s2 = observers::design_linear(double_integrator(), row({1, 0}),
                                     Eigen::MatrixXd(col({2, 1})),
                                     5.0 * Eigen::Matrix2d::Identity());
  s1.xhat0 = s2.xhat0 = Eigen::Vector2d::Zero();
  auto plant = double_integrator_plant(0.7, 5.0, 0.01);
  auto r1 = observers::simulate_linear(plant, s1);
  auto r2 = observers::simulate_linear(plant, s2);
  CHECK((r1.error.samples - r2.error.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK((5.0 * s1.P - s2.P).cwiseAbs().maxCoeff() <= 1e-8 * s2.P.norm());
  CHECK(r1.envelope_check.pass == r2.envelope_check.pass);
}

TEST_CASE("build_high_gain: scaling matrix and structure checks") {
  auto phi2 = sysdsl::parse_field({"0", "-0.1*sin(x1)"}, {2, 0});
  auto spec = observers::build_high_gain(phi2, col({2, 1}), 1.0);
  CHECK((spec.Pi - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);

  auto phi3 = sysdsl::parse_field({"0", "0", "0.2*tanh(x2)"}, {3, 0});
  auto s3 = observers::build_high_gain(phi3, col({6, 11, 6}), 0.5);
  CHECK(s3.Pi(0, 0) == doctest::Approx(0.5));
  CHECK(s3.Pi(1, 1) == doctest::Approx(0.25));
  CHECK(s3.Pi(2, 2) == doctest::Approx(0.125));

  // similarity identities of the canonical form
  for (double theta : {0.5, 2.0}) {
    auto s = observers::build_high_gain(phi2, col({2, 1}), theta);
    const Eigen::MatrixXd lhsA = s.Pi * s.A * s.Pi.inverse();
    CHECK((lhsA - s.A / theta).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd lhsC = s.C * s.Pi.inverse();
    CHECK((lhsC - s.C / theta).cwiseAbs().maxCoeff() <= 1e-12);
  }

  auto bad = sysdsl::parse_field({"x2", "0"}, {2, 0});  // phi_1 touches x2
  CHECK_THROWS_AS(observers::build_high_gain(bad, col({2, 1}), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(observers::build_high_gain(phi2, col({2, 1}), -1.0),
                  std::invalid_argument);
}

TEST_CASE("high_gain_condition: worked arithmetic") {
  const Eigen::Matrix2d I2 = Eigen::Matrix2d::Identity();
  auto pass = observers::high_gain_condition(1.0, I2, 0.1, 2);
  CHECK(pass.pass);
  CHECK(pass.worst_margin == doctest::Approx(-0.2).epsilon(1e-12));

  auto fail = observers::high_gain_condition(10.0, I2, 0.1, 2);
  CHECK_FALSE(fail.pass);
  CHECK(fail.worst_margin == doctest::Approx(0.7).epsilon(1e-12));

  auto nolin = observers::high_gain_condition(123.0, I2, 0.0, 2);
  CHECK(nolin.pass);

  CHECK_THROWS_AS(observers::high_gain_condition(0.0, I2, 0.1, 2),
                  std::invalid_argument);
}

TEST_CASE("simulate_high_gain: triangular benchmark converges") {
  auto phi = sysdsl::parse_field({"0", "-0.1*sin(x1)"}, {2, 0});
  auto spec = observers::build_high_gain(phi, col({2, 1}), 0.8);
  spec.xhat0 = Eigen::Vector2d::Zero();

  solver::IVP plant;
  plant.system = solver::make_expression_system(
      sysdsl::parse_field({"x2", "-0.1*sin(x1)"}, {2, 0}),
      sysdsl::parse_field({"x1"}, {2, 0}));
  plant.x0 = Eigen::Vector2d(1.0, 0.5);
  plant.ord = FractionalOrder(0.6, 1.0);
  plant.T = 15.0;
  plant.dt = 0.01;

  auto rep = observers::simulate_high_gain(plant, spec);
  REQUIRE(rep.error.size() > 0);
  const double e0 = rep.error.state(0).norm();
  const double eT = rep.error.state(rep.error.size() - 1).norm();
  CHECK(eT < e0);
  CHECK(rep.envelope_check.pass);
  CHECK(rep.verdict);

  // matching initial estimate stays matched
  observers::ObserverSpec match = spec;
  match.xhat0 = plant.x0;
  auto rep2 = observers::simulate_high_gain(plant, match);
  CHECK(rep2.error.samples.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("simulate_high_gain: zero nonlinearity reduces to the linear observer") {
  auto phi0 = sysdsl::parse_field({"0", "0"}, {2, 0});
  const double theta = 0.5;
  auto hg = observers::build_high_gain(phi0, col({2, 1}), theta);
  hg.xhat0 = Eigen::Vector2d::Zero();

  solver::IVP plant;
  plant.system = solver::make_expression_system(
      sysdsl::parse_field({"x2", "0"}, {2, 0}),
      sysdsl::parse_field({"x1"}, {2, 0}));
  plant.x0 = Eigen::Vector2d(1.0, -0.5);
  plant.ord = FractionalOrder(0.7, 1.0);
  plant.T = 4.0;
  plant.dt = 0.01;
  auto rep_hg = observers::simulate_high_gain(plant, hg);

  // the same run through the linear machinery with gain Pi^{-1} K
  auto lin = observers::design_linear(double_integrator(), row({1, 0}),
                                      Eigen::MatrixXd(hg.Pi.inverse() * hg.K),
                                      Eigen::Matrix2d::Identity());
  lin.xhat0 = Eigen::Vector2d::Zero();
  auto plant_lin = double_integrator_plant(0.7, 4.0, 0.01);
  plant_lin.x0 = Eigen::Vector2d(1.0, -0.5);
  auto rep_lin = observers::simulate_linear(plant_lin, lin);

  CHECK((rep_hg.error.samples - rep_lin.error.samples).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("build_lipschitz and lipschitz_condition") {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(1, 1);
  // Abar = -2; Q = 1 gives Q Abar + Abar^T Q = -4 = -P
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd P = 4.0 * Eigen::MatrixXd::Identity(1, 1);
  sysdsl::Box box{Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0)};
  auto phi3 = sysdsl::parse_field({"0.1*tanh(x1)"}, {1, 0});

  auto spec = observers::build_lipschitz(A, C, {}, {}, phi3, K, P, Q, box);
  CHECK(spec.condition_pass);
  CHECK(spec.sup_grad_phi3 == doctest::Approx(0.1).epsilon(1e-3));

  // wrong certificate pair is rejected
  CHECK_THROWS_AS(observers::build_lipschitz(A, C, {}, {}, phi3, K,
                                             Eigen::MatrixXd::Identity(1, 1), Q, box),
                  std::invalid_argument);

  // linear phi3 = c x passes iff |c| < 1/2 when P = Q = I
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(1, 1);
  auto ok = observers::lipschitz_condition(sysdsl::parse_field({"0.4*x1"}, {1, 0}),
                                           I1, I1, box);
  CHECK(ok.pass);
  auto no = observers::lipschitz_condition(sysdsl::parse_field({"0.6*x1"}, {1, 0}),
                                           I1, I1, box);
  CHECK_FALSE(no.pass);

  // tanh: sampled sup of sech^2 is 1, compared against the ratio
  auto th = observers::lipschitz_condition(sysdsl::parse_field({"tanh(x1)"}, {1, 0}),
                                           I1, I1, box);
  CHECK(th.worst_margin == doctest::Approx(1.0 - 0.5).epsilon(2e-2));

  auto zero = observers::lipschitz_condition({}, I1, I1, box);
  CHECK(zero.pass);
}

TEST_CASE("simulate_lipschitz: scalar benchmark") {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd P = 4.0 * Eigen::MatrixXd::Identity(1, 1);
  sysdsl::Box box{Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0)};
  auto phi3 = sysdsl::parse_field({"0.1*tanh(x1)"}, {1, 0});
  auto spec = observers::build_lipschitz(A, C, {}, {}, phi3, K, P, Q, box);
  spec.xhat0 = Eigen::VectorXd::Constant(1, -0.5);

  solver::IVP plant;
  plant.system = solver::make_expression_system(
      sysdsl::parse_field({"-x1 + 0.1*tanh(x1)"}, {1, 0}),
      sysdsl::parse_field({"x1"}, {1, 0}));
  plant.x0 = Eigen::VectorXd::Constant(1, 1.0);
  plant.ord = FractionalOrder(0.6, 1.0);
  plant.T = 10.0;
  plant.dt = 0.01;

  auto rep = observers::simulate_lipschitz(plant, spec);
  REQUIRE(rep.error.size() > 0);
  CHECK(rep.warnings.empty());
  const double e0 = rep.error.state(0).norm();
  const double eT = rep.error.state(rep.error.size() - 1).norm();
  CHECK(eT < 0.05 * e0);
  CHECK(rep.envelope_check.pass);
  CHECK(rep.lyapunov_check.pass);
  CHECK(rep.verdict);

  // matched start stays matched
  observers::ObserverSpec match = spec;
  match.xhat0 = plant.x0;
  auto rep2 = observers::simulate_lipschitz(plant, match);
  CHECK(rep2.error.samples.cwiseAbs().maxCoeff() <= 1e-8);

  // deliberately violated smallness condition only warns
  auto big = sysdsl::parse_field({"2*x1"}, {1, 0});
  const Eigen::MatrixXd Abig = Eigen::MatrixXd::Constant(1, 1, -4.0);
  // Abar = -5; Q = 1: P = 10
  auto spec_bad = observers::build_lipschitz(
      Abig, C, {}, {}, big, K, 10.0 * Eigen::MatrixXd::Identity(1, 1), Q, box);
  CHECK_FALSE(spec_bad.condition_pass);
  solver::IVP plant_bad = plant;
  plant_bad.system = solver::make_expression_system(
      sysdsl::parse_field({"-4*x1 + 2*x1"}, {1, 0}),
      sysdsl::parse_field({"x1"}, {1, 0}));
  auto rep_bad = observers::simulate_lipschitz(plant_bad, spec_bad);
  CHECK_FALSE(rep_bad.warnings.empty());
}

TEST_CASE("lipschitz observer with a coordinate change (phi2 != 0)") {
  // phi2(y) = 0.2 sin(y): z = x - phi2(y); phi2 == 0 reduction is covered
  // above, this exercises the y fixed point and the mapping back
  const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd P = 4.0 * Eigen::MatrixXd::Identity(1, 1);
  sysdsl::Box box{Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0)};
  auto phi1 = sysdsl::parse_field({"0.1*cos(x1)"}, {1, 0});
  auto phi2 = sysdsl::parse_field({"0.2*sin(x1)"}, {1, 0});
  auto phi3 = sysdsl::parse_field({"0.1*tanh(x1)"}, {1, 0});
  auto spec = observers::build_lipschitz(A, C, phi1, phi2, phi3, K, P, Q, box);
  spec.xhat0 = Eigen::VectorXd::Constant(1, 0.0);

  solver::IVP plant;
  plant.system = solver::make_expression_system(
      sysdsl::parse_field({"-x1"}, {1, 0}),  // placeholder; z-dynamics drive the run
      sysdsl::parse_field({"x1"}, {1, 0}));
  plant.x0 = Eigen::VectorXd::Constant(1, 0.8);
  plant.ord = FractionalOrder(0.5, 1.0);
  plant.T = 8.0;
  plant.dt = 0.01;

  auto rep = observers::simulate_lipschitz(plant, spec);
  REQUIRE(rep.error.size() > 0);
  const double e0 = rep.error.state(0).norm();
  const double eT = rep.error.state(rep.error.size() - 1).norm();
  CHECK(eT < 0.2 * e0);
  CHECK(rep.envelope_check.pass);
}
