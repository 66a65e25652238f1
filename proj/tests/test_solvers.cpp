#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "mevo/basis.hpp"
#include "mevo/errors.hpp"
#include "mevo/solvers.hpp"

using namespace mevo;

namespace {

constexpr double kPi = 3.14159265358979323846;

BasisPtr trig7() {
  return make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3);
}

BasisPtr sine5() {
  return make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
}

}  // namespace

TEST_CASE("transport rotates each cosine/sine pair by the phase k alpha t") {
  const BasisPtr b = trig7();
  const double alpha = 1.3, t = 0.47;
  const PdeSpec pde = PdeSpec::advection(alpha);

  for (int k = 1; k <= 3; ++k) {
    Eigen::VectorXd e_cos = Eigen::VectorXd::Zero(7), e_sin = Eigen::VectorXd::Zero(7);
    e_cos(2 * k - 1) = 1.0;
    e_sin(2 * k) = 1.0;
    const double c = std::cos(k * alpha * t), s = std::sin(k * alpha * t);

    const Eigen::VectorXd rc = exact_modal_step(*b, e_cos, t, pde);
    CHECK(rc(2 * k - 1) == doctest::Approx(c).epsilon(1e-14));
    CHECK(rc(2 * k) == doctest::Approx(s).epsilon(1e-14));
    CHECK(rc.norm() == doctest::Approx(1.0).epsilon(1e-14));

    const Eigen::VectorXd rs = exact_modal_step(*b, e_sin, t, pde);
    CHECK(rs(2 * k - 1) == doctest::Approx(-s).epsilon(1e-14));
    CHECK(rs(2 * k) == doctest::Approx(c).epsilon(1e-14));
  }

  // The constant mode is left alone.
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(7);
  e0(0) = 2.5;
  CHECK((exact_modal_step(*b, e0, t, pde) - e0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pure decay scales each sine mode by exp(-sigma k^2 t)") {
  const BasisPtr b = sine5();
  const double sigma = 0.1, t = 0.8;
  const PdeSpec pde = PdeSpec::diffusion(sigma);
  for (int j = 0; j < 5; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(5);
    e(j) = 1.0;
    const Eigen::VectorXd r = exact_modal_step(*b, e, t, pde);
    const int k = j + 1;
    for (int i = 0; i < 5; ++i) {
      const double expect = i == j ? std::exp(-sigma * k * k * t) : 0.0;
      CHECK(r(i) == doctest::Approx(expect).epsilon(1e-14));
    }
  }
}

TEST_CASE("decay on the periodic basis preserves the mean exactly") {
  const BasisPtr b = trig7();
  const PdeSpec pde = PdeSpec::diffusion(0.25);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
  v(0) = 1.7;
  v(3) = 0.6;  // cos(2x) component
  const Eigen::VectorXd r = exact_modal_step(*b, v, 0.9, pde);
  CHECK(r(0) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(r(3) == doctest::Approx(0.6 * std::exp(-0.25 * 4.0 * 0.9)).epsilon(1e-14));
}

TEST_CASE("two-dimensional evolution matches the tensor product expansion") {
  const BasisPtr b = make_basis(rectangle(-kPi, kPi, -kPi, kPi), BasisKind::TensorTrig2d, 25);
  const double a1 = 1.0, a2 = 0.7, s1 = 0.1, s2 = 0.16, t = 0.6;
  const PdeSpec pde = PdeSpec::advection_diffusion_2d(a1, a2, s1, s2);

  // x-only harmonic: rotation in its pair times the one-axis decay.
  {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(25);
    v(1) = 1.0;  // cos x
    const Eigen::VectorXd r = exact_modal_step(*b, v, t, pde);
    CHECK(r(1) == doctest::Approx(std::exp(-s1 * t) * std::cos(a1 * t)).epsilon(1e-13));
    CHECK(r(2) == doctest::Approx(std::exp(-s1 * t) * std::sin(a1 * t)).epsilon(1e-13));
    CHECK(r.head(1).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(r.tail(22).cwiseAbs().maxCoeff() < 1e-13);
  }

  // Mixed (1,1) shell: product of the two one-axis rotations.
  {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(25);
    v(13) = 1.0;  // cos x cos y
    const Eigen::VectorXd r = exact_modal_step(*b, v, t, pde);
    const double d = std::exp(-(s1 + s2) * t);
    const double cp = std::cos(a1 * t), sp = std::sin(a1 * t);
    const double cq = std::cos(a2 * t), sq = std::sin(a2 * t);
    CHECK(r(13) == doctest::Approx(d * cp * cq).epsilon(1e-13));
    CHECK(r(14) == doctest::Approx(d * cp * sq).epsilon(1e-13));
    CHECK(r(15) == doctest::Approx(d * sp * cq).epsilon(1e-13));
    CHECK(r(16) == doctest::Approx(d * sp * sq).epsilon(1e-13));
    CHECK(r.head(13).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("spectral march reduces to pure decay for tiny amplitudes") {
  const int m = 128;
  const Eigen::VectorXd x = fourier_grid(m);
  const double amp = 1e-6, sigma = 0.2, delta = 0.3;
  const Eigen::VectorXd u0 = (amp * (-x.array().sin())).matrix();
  SolverConfig cfg;
  cfg.grid = m;
  const Eigen::VectorXd u = viscous_burgers_march(u0, delta, 1, sigma, cfg).back();
  const Eigen::VectorXd heat = (u0.array() * std::exp(-sigma * delta)).matrix();
  CHECK((u - heat).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("spectral march keeps the mean of a mean-free state at zero") {
  const int m = 128;
  const Eigen::VectorXd x = fourier_grid(m);
  const Eigen::VectorXd u0 =
      (x.array().sin() + 0.3 * (2.0 * x.array()).sin()).matrix();
  SolverConfig cfg;
  cfg.grid = m;
  const auto snaps = viscous_burgers_march(u0, 0.2, 4, 0.3, cfg);
  for (const auto& u : snaps) CHECK(std::abs(u.mean()) < 1e-13);
}

TEST_CASE("spectral march reports blow-up instead of returning garbage") {
  const int m = 64;
  const Eigen::VectorXd x = fourier_grid(m);
  const Eigen::VectorXd u0 = (50.0 * x.array().sin()).matrix();
  SolverConfig cfg;
  cfg.grid = m;
  cfg.dt = 0.05;  // far beyond the advective stability limit
  CHECK_THROWS_AS(viscous_burgers_march(u0, 5.0, 1, 0.01, cfg), NumericError);
}

TEST_CASE("finite-volume march follows the characteristic solution before the shock") {
  const int m = 1024;
  const Eigen::VectorXd x = cell_center_grid(m);
  const Eigen::VectorXd u0 = (0.5 * x.array().sin()).matrix();
  SolverConfig cfg;
  cfg.grid = m;
  const double t = 0.8;
  const Eigen::VectorXd u = inviscid_burgers_march(u0, t, 1, cfg).back();

  Eigen::VectorXd exact(m);
  for (int i = 0; i < m; ++i) {
    double ui = u0(i);
    for (int it = 0; it < 200; ++it) ui = 0.5 * std::sin(x(i) - ui * t);
    exact(i) = ui;
  }
  const double rel = (u - exact).norm() / exact.norm();
  CHECK(rel < 1e-3);
}

TEST_CASE("modal evolution agrees between the closed form and the grid path") {
  const BasisPtr b = sine5();
  const PdeSpec pde = PdeSpec::diffusion(0.1);
  SolverConfig cfg;
  const ModalEvolver ev(b, pde, cfg);

  Eigen::VectorXd v(5);
  v << 0.9, -0.3, 0.2, -0.05, 0.01;
  CHECK((ev.step(v, 0.1) - exact_modal_step(*b, v, 0.1, pde)).cwiseAbs().maxCoeff() <
        1e-12);

  const auto series = ev.series(v, 0.1, 3);
  REQUIRE(series.size() == 4);
  CHECK((series[0] - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((series[1] - ev.step(v, 0.1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nonlinear modal series marches the grid without intermediate projection") {
  const BasisPtr b =
      make_basis(interval(-kPi, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
  const PdeSpec pde = PdeSpec::viscous_burgers(0.5);
  SolverConfig cfg;
  cfg.grid = 256;
  const ModalEvolver ev(b, pde, cfg);
  Eigen::VectorXd v(5);
  v << -1.0, 0.1, -0.02, 0.005, -0.001;
  const auto series = ev.series(v, 0.05, 2);
  REQUIRE(series.size() == 3);
  CHECK((series[1] - ev.step(v, 0.05)).cwiseAbs().maxCoeff() < 1e-12);
  for (const auto& s : series) CHECK(s.allFinite());
}

TEST_CASE("modal ode integration reproduces the exact linear evolution") {
  SolverConfig cfg;
  {
    const BasisPtr b = trig7();
    const PdeSpec pde = PdeSpec::advection(1.0);
    Eigen::VectorXd v(7);
    v << 1.5, 0.2, 1.0, -0.24, 0.03, 0.0, -0.04;
    const Trajectory g = galerkin_rollout(b, v, 0.1, 10, pde, cfg);
    Eigen::VectorXd e = v;
    for (int k = 1; k <= 10; ++k) {
      e = exact_modal_step(*b, e, 0.1, pde);
      CHECK((g.v[k] - e).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  {
    const BasisPtr b = sine5();
    const PdeSpec pde = PdeSpec::diffusion(0.1);
    Eigen::VectorXd v(5);
    v << 0.98, 0.24, -0.03, 0.03, -0.007;
    const Trajectory g = galerkin_rollout(b, v, 0.1, 10, pde, cfg);
    Eigen::VectorXd e = v;
    for (int k = 1; k <= 10; ++k) {
      e = exact_modal_step(*b, e, 0.1, pde);
      CHECK((g.v[k] - e).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("modal ode integration reports the step where it diverges") {
  const BasisPtr b =
      make_basis(interval(-kPi, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 9);
  const PdeSpec pde = PdeSpec::inviscid_burgers();
  SolverConfig cfg;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(9, 1e4);
  try {
    galerkin_rollout(b, v, 0.1, 50, pde, cfg);
    FAIL("divergent integration was accepted");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("solver configuration rejects unusable settings") {
  SolverConfig cfg;
  cfg.grid = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.grid = 512;
  cfg.cfl = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.cfl = 0.4;
  cfg.galerkin_substeps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  // Non-power-of-two spectral grid.
  SolverConfig bad;
  bad.grid = 300;
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(300);
  CHECK_THROWS_AS(viscous_burgers_march(u0, 0.1, 1, 0.1, bad), ConfigError);
}
