#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mevo/errors.hpp"
#include "mevo/prediction.hpp"
#include "mevo/resnet.hpp"

using namespace mevo;
namespace fs = std::filesystem;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

BasisPtr trig_basis(int n) {
  // the trig factory takes the max wavenumber; n = 2k + 1
  return make_basis(interval(0.0, kTau, Boundary::Periodic), BasisKind::RealTrig, (n - 1) / 2);
}

BasisPtr sine_basis(int n) {
  return make_basis(interval(0.0, kTau / 2.0, Boundary::HomogeneousDirichlet),
                    BasisKind::Sine, n);
}

BasisPtr trig7() { return trig_basis(7); }

ResNet small_net(int n, uint64_t seed) {
  ResNetConfig cfg;
  cfg.n = n;
  cfg.blocks = 2;
  cfg.depth = 1;
  cfg.width = 6;
  cfg.seed = seed;
  return ResNet::init(cfg);
}

ResNet identity_net(int n) {
  ResNet net = small_net(n, 1);
  net.from_flat(Eigen::VectorXd::Zero(net.param_count()));
  return net;
}

ModalBox unit_box(int n, double half) {
  ModalBox box;
  box.lo = Eigen::VectorXd::Constant(n, -half);
  box.hi = Eigen::VectorXd::Constant(n, half);
  return box;
}

InitialCondition half_exp_sin() {
  InitialCondition ic;
  ic.id = "half-exp-sin";
  ic.eval = [](double x, double) { return 0.5 * std::exp(std::sin(x)); };
  return ic;
}

InitialCondition bump_0_pi() {
  InitialCondition ic;
  ic.id = "bump";
  ic.eval = [](double x, double) { return x * (kTau / 2.0 - x); };
  return ic;
}

PdeSpec advection(double a) { return PdeSpec::advection(a); }
PdeSpec diffusion(double sigma) { return PdeSpec::diffusion(sigma); }

}  // namespace

TEST_CASE("rollout iterates the network from the initial coefficients") {
  BasisPtr basis = trig7();
  ResNet net = small_net(7, 40);
  Eigen::VectorXd v0(7);
  v0 << 0.4, -0.2, 0.7, 0.05, -0.6, 0.3, 0.1;

  Trajectory traj = rollout(net, ModalVector{basis, v0}, 0.1, 5);
  CHECK(traj.kind == TrajKind::Predicted);
  CHECK(traj.delta == 0.1);
  REQUIRE(traj.v.size() == 6);
  CHECK(traj.steps() == 5);
  CHECK((traj.v[0].array() == v0.array()).all());
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd next = net.forward(traj.v[k]);
    CHECK((traj.v[k + 1].array() == next.array()).all());
  }
  CHECK(traj.time(3) == 0.1 * 3);
}

TEST_CASE("the all-zero network holds every state fixed") {
  BasisPtr basis = trig7();
  ResNet net = identity_net(7);
  Eigen::VectorXd v0 = Eigen::VectorXd::LinSpaced(7, -0.5, 0.5);
  Trajectory traj = rollout(net, ModalVector{basis, v0}, 0.25, 8);
  for (const auto& v : traj.v) CHECK((v.array() == v0.array()).all());
}

TEST_CASE("a field start is projected before rolling out") {
  BasisPtr basis = trig7();
  Eigen::VectorXd v0(7);
  v0 << 1.0, 0.3, -0.2, 0.1, 0.05, -0.4, 0.2;
  FieldSample u = lift(ModalVector{basis, v0});
  Trajectory traj = rollout(identity_net(7), u, basis, 0.1, 3);
  CHECK((traj.v[0] - v0).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("a blowing-up network reports the diverging step") {
  BasisPtr basis = trig7();
  ResNet net = identity_net(7);
  // final bias pushes the first coefficient by 1e6 every step
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(net.param_count());
  flat(flat.size() - 1) = 1e6;
  net.from_flat(flat);
  try {
    rollout(net, ModalVector{basis, Eigen::VectorXd::Zero(7)}, 0.1, 4);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("diverged") != std::string::npos);
  }
  ResNet blank;
  CHECK_THROWS_AS(rollout(blank, ModalVector{basis, Eigen::VectorXd::Zero(7)}, 0.1, 2),
                  ConfigError);
}

TEST_CASE("relative error of a trajectory against itself vanishes") {
  BasisPtr basis = trig7();
  Trajectory traj = rollout(small_net(7, 8), ModalVector{basis, Eigen::VectorXd::Constant(7, 0.3)},
                            0.2, 6);
  ErrorSeries err = relative_error(traj, traj, ErrorNorm::CoefficientL2);
  REQUIRE(err.value.size() == 7);
  for (std::size_t k = 0; k < err.value.size(); ++k) {
    CHECK(err.value[k] == 0.0);
    CHECK(err.reference_zero[k] == 0);
  }
}

TEST_CASE("a zero reference is flagged instead of divided by") {
  BasisPtr basis = trig7();
  Trajectory a = rollout(identity_net(7), ModalVector{basis, Eigen::VectorXd::Constant(7, 0.1)},
                         0.2, 3);
  Trajectory b = rollout(identity_net(7), ModalVector{basis, Eigen::VectorXd::Zero(7)}, 0.2, 3);
  ErrorSeries err = relative_error(a, b, ErrorNorm::CoefficientL2);
  for (std::size_t k = 0; k < err.value.size(); ++k) {
    CHECK(err.reference_zero[k] == 1);
    CHECK(err.value[k] == 0.0);
  }
}

TEST_CASE("trajectories must share a time axis and width") {
  BasisPtr basis = trig7();
  ResNet net = identity_net(7);
  Eigen::VectorXd v0 = Eigen::VectorXd::Constant(7, 0.2);
  Trajectory a = rollout(net, ModalVector{basis, v0}, 0.2, 4);
  Trajectory b = rollout(net, ModalVector{basis, v0}, 0.2, 5);
  CHECK_THROWS_AS(relative_error(a, b, ErrorNorm::CoefficientL2), ConfigError);
  Trajectory c = rollout(net, ModalVector{basis, v0}, 0.3, 4);
  CHECK_THROWS_AS(relative_error(a, c, ErrorNorm::CoefficientL2), ConfigError);

  BasisPtr basis5 = trig_basis(5);
  Trajectory d = rollout(identity_net(5), ModalVector{basis5, Eigen::VectorXd::Constant(5, 0.2)},
                         0.2, 4);
  CHECK_THROWS_AS(relative_error(a, d, ErrorNorm::CoefficientL2), ConfigError);
}

TEST_CASE("optimal projection under advection keeps its projection error") {
  BasisPtr basis = trig7();
  Trajectory ref = reference_trajectory(basis, half_exp_sin(), 0.2, 4, advection(1.3),
                                        TrajKind::OptimalProjection);
  REQUIRE(ref.eps_proj.size() == 5);
  REQUIRE(ref.field_norms.size() == 5);
  for (int k = 0; k <= 4; ++k) {
    // a pure translation never changes the distance to the modal subspace
    CHECK(ref.eps_proj[k] == doctest::Approx(4.87538480e-3).epsilon(1e-5));
    CHECK(ref.field_norms[k] == doctest::Approx(1.89229073).epsilon(1e-6));
  }

  // the same dynamics in modal space: projection commutes with translation
  Trajectory exact = reference_trajectory(basis, half_exp_sin(), 0.2, 4, advection(1.3),
                                          TrajKind::ExactModal);
  for (int k = 0; k <= 4; ++k)
    CHECK((ref.v[k] - exact.v[k]).lpNorm<Eigen::Infinity>() <= 1e-9);

  // field-norm relative error against itself reduces to eps_proj / field_norm
  ErrorSeries err = relative_error(ref, ref, ErrorNorm::FieldL2);
  for (int k = 0; k <= 4; ++k)
    CHECK(err.value[k] == doctest::Approx(ref.eps_proj[k] / ref.field_norms[k]).epsilon(1e-12));
}

TEST_CASE("probe estimates see an isometry for advection") {
  BasisPtr basis = trig7();
  ProbeEstimates est = estimate_operators(ResNet{}, basis, advection(0.9), 0.3,
                                          unit_box(7, 1.0), 200, 77);
  CHECK(est.probe_count == 200);
  CHECK(est.eps_dnn == 0.0);  // no network supplied
  CHECK(est.norm_n == 0.0);
  CHECK(est.norm_pe >= 0.99);
  CHECK(est.norm_pe <= 1.0 + 1e-12);
  CHECK(!est.description.empty());
}

TEST_CASE("probe estimates see a contraction for diffusion") {
  BasisPtr basis = sine_basis(5);
  const double sigma = 0.1, delta = 0.5;
  ProbeEstimates est = estimate_operators(identity_net(5), basis, diffusion(sigma), delta,
                                          unit_box(5, 1.0), 200, 41);
  // the slowest mode decays like exp(-sigma delta); the fastest like exp(-25 sigma delta)
  CHECK(est.norm_pe <= std::exp(-sigma * delta) * (1.0 + 1e-10));
  CHECK(est.norm_pe >= std::exp(-25.0 * sigma * delta) - 1e-10);
  // the identity network reproduces its input exactly
  CHECK(est.norm_n == 1.0);
  CHECK(est.eps_dnn > 0.0);
}

TEST_CASE("step-error bound report has coherent structure") {
  BasisPtr basis = sine_basis(5);
  ErrorReport rep = theorem_bound_check(identity_net(5), basis, diffusion(0.15),
                                        unit_box(5, 1.0), 500, 11, bump_0_pi(), 0.2, 5);
  REQUIRE(rep.times.size() == 6);
  REQUIRE(rep.coeff_err.size() == 6);
  REQUIRE(rep.bound_rhs_coeff.size() == 6);
  REQUIRE(rep.bound_rhs_field.size() == 6);
  REQUIRE(rep.eps_proj.size() == 6);
  CHECK(rep.times[3] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rep.coeff_err[0] == 0.0);  // both sides start from the same projection
  CHECK(rep.bound_rhs_coeff[0] == 0.0);
  CHECK(rep.bound_rhs_field[0] == rep.eps_proj[0]);

  bool holds = true;
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    if (rep.coeff_err[k] > rep.bound_rhs_coeff[k] + 1e-12) holds = false;
    if (k > 0) slack = std::min(slack, rep.bound_rhs_coeff[k] - rep.coeff_err[k]);
    CHECK(rep.bound_rhs_field[k] == rep.bound_rhs_coeff[k] + rep.eps_proj[k]);
  }
  CHECK(rep.holds == holds);
  CHECK(rep.min_slack == slack);
  CHECK(rep.probes.probe_count == 500);

  // the identity network misses the decay by roughly (1 - e^{-sigma delta}) |v|,
  // which the probe sup over the box dominates: the bound should hold here
  CHECK(rep.holds);
  CHECK(rep.min_slack >= 0.0);
}

TEST_CASE("error reports serialize to parseable json") {
  BasisPtr basis = sine_basis(5);
  ErrorReport rep = theorem_bound_check(identity_net(5), basis, diffusion(0.15),
                                        unit_box(5, 1.0), 100, 11, bump_0_pi(), 0.2, 3);
  nlohmann::json j = nlohmann::json::parse(rep.to_json());
  for (const char* key : {"times", "coeff_err", "rel_err_coeff", "rel_err_field", "eps_proj",
                          "bound_rhs", "bound_rhs_field", "eps_dnn", "norm_N", "norm_PE",
                          "probe_count", "probe_description", "holds", "min_slack"})
    CHECK(j.contains(key));
  CHECK(j["times"].size() == 4);
  CHECK(j["holds"].is_boolean());

  const fs::path p = fs::temp_directory_path() / "mevo_probe_report.json";
  rep.save_json(p.string());
  std::ifstream in(p);
  nlohmann::json back = nlohmann::json::parse(in);
  CHECK(back["probe_count"] == 100);
  fs::remove(p);
}

TEST_CASE("exact evolution stays within its accumulated projection bound") {
  BasisPtr basis = sine_basis(7);
  PropositionReport rep = proposition_bound_check(basis, bump_0_pi(), 0.1, 10,
                                                  diffusion(0.2), unit_box(7, 1.5), 200, 13);
  REQUIRE(rep.times.size() == 11);
  REQUIRE(rep.lhs.size() == 11);
  REQUIRE(rep.rhs.size() == 11);
  CHECK(rep.norm_pe > 0.0);
  CHECK(rep.norm_pe < 1.0);  // diffusion contracts
  CHECK(rep.holds);
  CHECK(rep.min_slack >= 0.0);
  // projection commutes with the sine-series decay, so the field error is
  // exactly the per-step projection error and sits far inside the bound
  for (int k = 1; k <= 10; ++k) CHECK(rep.lhs[k] <= rep.rhs[k] + 1e-10);
}

TEST_CASE("trajectory csv round-trips coefficients bit for bit") {
  BasisPtr basis = trig7();
  Trajectory traj = rollout(small_net(7, 99), ModalVector{basis, Eigen::VectorXd::Constant(7, 0.25)},
                            0.1, 6);
  const fs::path p = fs::temp_directory_path() / "mevo_probe_traj.csv";
  save_trajectory_csv(p.string(), traj);
  Trajectory back = load_trajectory_csv(p.string(), basis);
  CHECK(back.delta == traj.delta);
  REQUIRE(back.v.size() == traj.v.size());
  for (std::size_t k = 0; k < traj.v.size(); ++k)
    CHECK((back.v[k].array() == traj.v[k].array()).all());

  // wrong width is refused up front via the header
  BasisPtr basis5 = trig_basis(5);
  CHECK_THROWS_AS(load_trajectory_csv(p.string(), basis5), FormatError);
  fs::remove(p);
  CHECK_THROWS_AS(load_trajectory_csv(p.string(), basis), FormatError);
}
