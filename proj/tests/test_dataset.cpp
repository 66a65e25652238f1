#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "mevo/basis.hpp"
#include "mevo/dataset.hpp"
#include "mevo/errors.hpp"
#include "mevo/solvers.hpp"

using namespace mevo;

namespace {

constexpr double kPi = 3.14159265358979323846;

BasisPtr sine5() {
  return make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
}

ModalBox box5(double r) {
  ModalBox b;
  b.lo = Eigen::VectorXd::Constant(5, -r);
  b.hi = Eigen::VectorXd::Constant(5, r);
  return b;
}

}  // namespace

TEST_CASE("box sampling is deterministic, contained, and index-separated") {
  ModalBox box;
  box.lo = Eigen::VectorXd::Zero(4);
  box.hi.resize(4);
  box.hi << 1.0, 0.5, 0.2, 0.05;

  for (uint64_t j = 0; j < 100; ++j) {
    const Eigen::VectorXd p = sample_box_point(box, 42, j);
    REQUIRE(p.size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(p(i) >= box.lo(i));
      CHECK(p(i) < box.hi(i));
    }
    CHECK((p - sample_box_point(box, 42, j)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((sample_box_point(box, 42, 0) - sample_box_point(box, 42, 1))
            .cwiseAbs()
            .maxCoeff() > 0.0);
  CHECK((sample_box_point(box, 42, 0) - sample_box_point(box, 43, 0))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("generated pairs hold the exact one-lag evolution of their inputs") {
  const BasisPtr b = sine5();
  const ModalBox box = box5(1.0);
  const PdeSpec pde = PdeSpec::diffusion(0.1);
  const SolverConfig scfg;

  const PairDataset ds = generate_modal_dataset(b, box, 64, 0.1, pde, scfg, 2024);
  REQUIRE(ds.size() == 64);
  REQUIRE(ds.n() == 5);
  CHECK(ds.delta == 0.1);
  CHECK(ds.eta == 0.0);

  for (int64_t j = 0; j < ds.size(); ++j) {
    const Eigen::VectorXd v0 = ds.inputs.row(j).transpose();
    for (int i = 0; i < 5; ++i) {
      CHECK(v0(i) >= box.lo(i));
      CHECK(v0(i) < box.hi(i));
    }
    const Eigen::VectorXd vd = exact_modal_step(*b, v0, 0.1, pde);
    CHECK((ds.targets.row(j).transpose() - vd).cwiseAbs().maxCoeff() < 1e-12);
  }

  // The worker count must not leak into the data.
  const PairDataset serial =
      generate_modal_dataset(b, box, 64, 0.1, pde, scfg, 2024, false);
  CHECK((ds.inputs.array() == serial.inputs.array()).all());
  CHECK((ds.targets.array() == serial.targets.array()).all());
}

TEST_CASE("a diverging sample is reported with its index") {
  const BasisPtr b =
      make_basis(interval(-kPi, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
  SolverConfig cfg;
  cfg.grid = 64;
  cfg.dt = 0.05;  // far beyond the advective stability limit at this amplitude
  std::vector<ModalVector> samples = {
      ModalVector{b, Eigen::VectorXd::Constant(5, 100.0)}};
  try {
    generate_pairs(samples, 5.0, PdeSpec::viscous_burgers(0.01), cfg);
    FAIL("divergent sample was accepted");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
}

TEST_CASE("snapshot pairing projects fields separated by the lag") {
  const BasisPtr b = sine5();
  const PdeSpec pde = PdeSpec::diffusion(0.2);

  Eigen::VectorXd v0(5);
  v0 << 0.9, 0.3, -0.1, 0.05, -0.01;

  SnapshotSet set;
  set.basis = b;
  SnapshotTrajectory tr;
  tr.id = "probe";
  for (double t : {0.0, 0.35, 0.4, 0.75}) {
    tr.times.push_back(t);
    tr.fields.push_back(lift(ModalVector{b, exact_modal_step(*b, v0, t, pde)}));
  }
  set.trajectories.push_back(tr);

  const PairDataset ds = pair_snapshots(set, 0.4, 1e-9);
  REQUIRE(ds.size() == 2);  // 0 -> 0.4 and 0.35 -> 0.75
  CHECK(ds.provenance == DatasetProvenance::SnapshotPaired);
  for (int64_t j = 0; j < 2; ++j) {
    const Eigen::VectorXd in = ds.inputs.row(j).transpose();
    const Eigen::VectorXd out = ds.targets.row(j).transpose();
    CHECK((exact_modal_step(*b, in, 0.4, pde) - out).cwiseAbs().maxCoeff() < 1e-10);
  }

  // An unmatchable lag names the nearest gap instead of failing silently.
  try {
    pair_snapshots(set, 0.5, 1e-9);
    FAIL("impossible lag was accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("nearest gap") != std::string::npos);
  }
}

TEST_CASE("multiplicative noise is bounded, keyed, and leaves zeros alone") {
  const BasisPtr b = sine5();
  PairDataset ds = generate_modal_dataset(b, box5(1.0), 32, 0.1,
                                          PdeSpec::diffusion(0.1), SolverConfig{}, 7);
  ds.inputs.col(2).setZero();  // a structurally silent mode

  const PairDataset clean = add_noise(ds, 0.0, 1);
  CHECK((clean.inputs.array() == ds.inputs.array()).all());
  CHECK((clean.targets.array() == ds.targets.array()).all());

  const double eta = 0.05;
  const PairDataset noisy = add_noise(ds, eta, 1);
  CHECK(noisy.eta == eta);
  bool changed = false;
  for (int64_t j = 0; j < ds.size(); ++j) {
    for (int i = 0; i < ds.n(); ++i) {
      const double c = ds.inputs(j, i), nz = noisy.inputs(j, i);
      CHECK(std::abs(nz - c) <= eta * std::abs(c) + 1e-15);
      if (nz != c) changed = true;
      const double ct = ds.targets(j, i), nt = noisy.targets(j, i);
      CHECK(std::abs(nt - ct) <= eta * std::abs(ct) + 1e-15);
    }
  }
  CHECK(changed);
  CHECK((noisy.inputs.col(2).array() == 0.0).all());

  const PairDataset again = add_noise(ds, eta, 1);
  CHECK((again.inputs.array() == noisy.inputs.array()).all());
  const PairDataset other = add_noise(ds, eta, 2);
  CHECK((other.inputs.array() != noisy.inputs.array()).any());
}

TEST_CASE("binary dataset io round trips bit for bit and rejects corruption") {
  namespace fs = std::filesystem;
  const BasisPtr b = sine5();
  const PairDataset ds = generate_modal_dataset(b, box5(0.8), 16, 0.05,
                                                PdeSpec::diffusion(0.1), SolverConfig{}, 3);
  const fs::path p = fs::temp_directory_path() / "mevo_ds_probe.mevd";
  save_dataset(p.string(), ds);

  const PairDataset r = load_dataset(p.string());
  CHECK(r.delta == ds.delta);
  CHECK(r.eta == ds.eta);
  CHECK(r.size() == ds.size());
  CHECK(r.n() == ds.n());
  CHECK((r.inputs.array() == ds.inputs.array()).all());
  CHECK((r.targets.array() == ds.targets.array()).all());

  // Flip the magic.
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  CHECK_THROWS_AS(load_dataset(p.string()), FormatError);

  // Rewrite, then truncate mid-payload.
  save_dataset(p.string(), ds);
  fs::resize_file(p, fs::file_size(p) - 64);
  CHECK_THROWS_AS(load_dataset(p.string()), FormatError);

  fs::remove(p);
  CHECK_THROWS_AS(load_dataset(p.string()), FormatError);
}
