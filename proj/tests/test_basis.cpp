#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "mevo/basis.hpp"
#include "mevo/errors.hpp"
#include "mevo/experiment.hpp"

using namespace mevo;

namespace {

constexpr double kPi = 3.14159265358979323846;

FieldSample sample_on_grid(const BasisPtr& basis, const InitialCondition& ic) {
  FieldSample f;
  f.grid = basis->grid();
  f.values.resize(f.grid.rows());
  const bool two_d = basis->domain().dims == 2;
  for (Eigen::Index q = 0; q < f.grid.rows(); ++q)
    f.values(q) = ic.eval(f.grid(q, 0), two_d ? f.grid(q, 1) : 0.0);
  return f;
}

}  // namespace

TEST_CASE("periodic trig basis interleaves constant, cosine, sine") {
  const BasisPtr b =
      make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3);
  REQUIRE(b->n() == 7);
  CHECK(b->max_wavenumber(0) == 3);

  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, kPi / 2.0;
  const Eigen::MatrixXd V = b->eval_on(pts);
  const double c0 = 1.0 / std::sqrt(2.0 * kPi);
  const double ch = 1.0 / std::sqrt(kPi);
  CHECK(V(0, 0) == doctest::Approx(c0).epsilon(1e-14));
  CHECK(V(0, 1) == doctest::Approx(c0).epsilon(1e-14));
  CHECK(V(1, 0) == doctest::Approx(ch).epsilon(1e-14));   // cos(x) at 0
  CHECK(V(1, 1) == doctest::Approx(0.0).epsilon(1e-14));  // cos(x) at pi/2
  CHECK(V(2, 0) == doctest::Approx(0.0).epsilon(1e-14));  // sin(x) at 0
  CHECK(V(2, 1) == doctest::Approx(ch).epsilon(1e-14));   // sin(x) at pi/2
  CHECK(V(3, 1) == doctest::Approx(-ch).epsilon(1e-14));  // cos(2x) at pi/2
  CHECK(V(6, 1) == doctest::Approx(-ch).epsilon(1e-14));  // sin(3x) at pi/2

  const Eigen::MatrixXd G = b->gram();
  CHECK((G - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sine bases carry the right normalization on both domains") {
  const BasisPtr half =
      make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
  const BasisPtr full =
      make_basis(interval(-kPi, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 9);
  Eigen::MatrixXd pts(1, 1);
  pts << kPi / 2.0;
  CHECK(half->eval_on(pts)(0, 0) ==
        doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-14));
  CHECK(full->eval_on(pts)(0, 0) ==
        doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-14));
  CHECK((half->gram() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((full->gram() - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(full->max_wavenumber(0) == 9);

  // The sine family is tied to these two intervals; anything else is a
  // configuration error rather than a silently wrong propagator.
  CHECK_THROWS_AS(
      make_basis(interval(0.0, 2.0, Boundary::HomogeneousDirichlet), BasisKind::Sine, 3),
      ConfigError);
}

TEST_CASE("closed-form derivatives match the analytic expressions") {
  const BasisPtr rt =
      make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 2);
  Eigen::MatrixXd pts(3, 1);
  pts << 0.3, 1.7, 4.1;
  const Eigen::MatrixXd D = rt->eval_deriv_on(pts, 0);
  const double ch = 1.0 / std::sqrt(kPi);
  for (int p = 0; p < 3; ++p) {
    CHECK(D(0, p) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(D(1, p) == doctest::Approx(-ch * std::sin(pts(p, 0))).epsilon(1e-13));
    CHECK(D(2, p) == doctest::Approx(ch * std::cos(pts(p, 0))).epsilon(1e-13));
    CHECK(D(3, p) == doctest::Approx(-2.0 * ch * std::sin(2.0 * pts(p, 0))).epsilon(1e-13));
  }
}

TEST_CASE("projection of the periodic benchmark start matches frozen coefficients") {
  const BasisPtr b =
      make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3);
  const FieldSample f = sample_on_grid(b, make_initial_condition("half-exp-sin"));
  const ModalVector mv = project(f, b);

  const std::vector<double> frozen = {1.5867782633593499,
                                      0.0,
                                      1.0017184302457911,
                                      -0.2406064800300373,
                                      0.0,
                                      0.0,
                                      -0.039292510125641903};
  REQUIRE(mv.v.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(mv.v(i) == doctest::Approx(frozen[i]).epsilon(1e-10));

  CHECK(projection_error(f, b) == doctest::Approx(4.87538480e-3).epsilon(1e-6));
  CHECK(field_norm(f, *b) == doctest::Approx(1.89229073).epsilon(1e-7));
}

TEST_CASE("projection of the quartic dirichlet start matches frozen coefficients") {
  const BasisPtr b =
      make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 9);
  const FieldSample f = sample_on_grid(b, make_initial_condition("quartic-dirichlet"));
  const ModalVector mv = project(f, b);

  // adaptive-quadrature integrals of u against sqrt(2/pi) sin(kx), 40 digits
  const std::vector<double> frozen = {
      1.2272312842898763,     0.30315978041434927,   -0.032210456066194877,
      0.037894972551793659,   -0.0082994832130674618, 0.011228140015346269,
      -0.0031593384521902489, 0.0047368715689742073, -0.0015125825974946644};
  REQUIRE(mv.v.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(mv.v(i) == doctest::Approx(frozen[i]).epsilon(1e-9));
}

TEST_CASE("two-dimensional tensor basis projects the smooth start consistently") {
  const BasisPtr b = make_basis(rectangle(-kPi, kPi, -kPi, kPi), BasisKind::TensorTrig2d, 25);
  REQUIRE(b->n() == 25);
  CHECK((b->gram() - Eigen::MatrixXd::Identity(25, 25)).cwiseAbs().maxCoeff() < 1e-12);

  const FieldSample f = sample_on_grid(b, make_initial_condition("exp-sin-cos-2d"));
  const ModalVector mv = project(f, b);
  CHECK(mv.v(0) == doctest::Approx(2.84250519116).epsilon(1e-9));

  // Round trip through the lifted field.
  const FieldSample lifted = lift(mv);
  const ModalVector back = project(lifted, b);
  CHECK((back.v - mv.v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gram-schmidt orthonormalizes raw samples and flags rank deficiency") {
  const PhysicalDomain dom = interval(-1.0, 1.0, Boundary::HomogeneousDirichlet);
  Quadrature quad;
  quad.axes.push_back(gauss_legendre_rule(-1.0, 1.0, 24));
  const auto& nodes = quad.axes[0].nodes;
  const int q = int(nodes.size());

  Eigen::MatrixXd raw(3, q);
  for (int j = 0; j < q; ++j) {
    raw(0, j) = 1.0;
    raw(1, j) = nodes[j];
    raw(2, j) = nodes[j] * nodes[j];
  }
  const BasisPtr b = orthonormalize(dom, quad, raw, {"1", "x", "x^2"});
  CHECK((b->gram() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b->values()(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  Eigen::MatrixXd dep(4, q);
  dep.topRows(3) = raw;
  dep.row(3) = 2.0 * raw.row(0) + 3.0 * raw.row(1);  // dependent combination
  try {
    orthonormalize(dom, quad, dep);
    FAIL("rank-deficient set was accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("basis json round trip preserves the quadrature and values") {
  namespace fs = std::filesystem;
  const BasisPtr b =
      make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3);
  const fs::path p = fs::temp_directory_path() / "mevo_basis_probe.json";
  b->save_json(p.string());
  const BasisPtr r = Basis::load_json(p.string());
  fs::remove(p);

  CHECK(r->kind() == b->kind());
  CHECK(r->n() == b->n());
  CHECK(r->domain().dims == 1);
  CHECK(r->domain().lo[0] == doctest::Approx(0.0));
  CHECK(r->domain().hi[0] == doctest::Approx(2.0 * kPi));
  REQUIRE(r->values().rows() == b->values().rows());
  REQUIRE(r->values().cols() == b->values().cols());
  CHECK((r->values() - b->values()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((r->weights() - b->weights()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("malformed basis json is rejected with context") {
  CHECK_THROWS_AS(Basis::from_json_string("{not json"), FormatError);
  CHECK_THROWS_AS(Basis::from_json_string("{\"kind\": \"no-such-basis\"}"),
                  Error);
}
