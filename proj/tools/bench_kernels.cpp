// Compares the OpenMP kernels against their serial reference paths: same
// inputs, bitwise-identical outputs required, wall clock for both. With one
// worker the two columns should roughly coincide; the point of the table is
// the identity check and the scaling once more workers are available.

#include <chrono>
#include <cstdio>
#include <string>

#include <Eigen/Dense>

#include "mevo/basis.hpp"
#include "mevo/dataset.hpp"
#include "mevo/parallel.hpp"
#include "mevo/prediction.hpp"
#include "mevo/resnet.hpp"
#include "mevo/solvers.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

int failures = 0;

void row(const char* name, const char* size, double serial_ms, double parallel_ms,
         bool match) {
  if (!match) ++failures;
  std::printf("%-28s %-18s %10.1f %10.1f %8.2fx  %s\n", name, size, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              match ? "identical" : "MISMATCH");
}

void bench_generate() {
  const mevo::BasisPtr sine =
      mevo::make_basis(mevo::interval(0.0, kPi, mevo::Boundary::HomogeneousDirichlet),
                       mevo::BasisKind::Sine, 5);
  mevo::ModalBox box;
  box.lo = Eigen::VectorXd::Constant(5, -1.0);
  box.hi = Eigen::VectorXd::Constant(5, 1.0);
  const auto samples = mevo::sample_modal_box(sine, box, 2000, 99);
  const mevo::PdeSpec pde = mevo::PdeSpec::diffusion(0.1);
  const mevo::SolverConfig scfg;

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = mevo::generate_pairs(samples, 0.1, pde, scfg, false);
  const double ts = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto par = mevo::generate_pairs(samples, 0.1, pde, scfg, true);
  const double tp = ms_since(t0);
  const bool match = (serial.inputs.array() == par.inputs.array()).all() &&
                     (serial.targets.array() == par.targets.array()).all();
  row("snapshot pairs (diffusion)", "J=2000 n=5", ts, tp, match);

  const mevo::BasisPtr sine9 =
      mevo::make_basis(mevo::interval(-kPi, kPi, mevo::Boundary::HomogeneousDirichlet),
                       mevo::BasisKind::Sine, 9);
  mevo::ModalBox box9;
  box9.lo = Eigen::VectorXd::Constant(9, -0.5);
  box9.hi = Eigen::VectorXd::Constant(9, 0.5);
  const auto samples9 = mevo::sample_modal_box(sine9, box9, 200, 99);
  const mevo::PdeSpec visc = mevo::PdeSpec::viscous_burgers(0.5);
  mevo::SolverConfig vcfg;
  vcfg.grid = 256;

  t0 = std::chrono::steady_clock::now();
  const auto vserial = mevo::generate_pairs(samples9, 0.05, visc, vcfg, false);
  const double vts = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto vpar = mevo::generate_pairs(samples9, 0.05, visc, vcfg, true);
  const double vtp = ms_since(t0);
  row("snapshot pairs (burgers)", "J=200 n=9", vts, vtp,
      (vserial.inputs.array() == vpar.inputs.array()).all() &&
          (vserial.targets.array() == vpar.targets.array()).all());
}

void bench_network() {
  mevo::ResNetConfig rc;
  rc.n = 7;
  rc.blocks = 2;
  rc.seed = 7;
  const mevo::ResNet model = mevo::ResNet::init(rc);

  const int J = 20000;
  mevo::ModalBox box;
  box.lo = Eigen::VectorXd::Constant(7, -1.0);
  box.hi = Eigen::VectorXd::Constant(7, 1.0);
  Eigen::MatrixXd X(J, 7), Y(J, 7);
  for (int j = 0; j < J; ++j) {
    X.row(j) = mevo::sample_box_point(box, 11, uint64_t(j)).transpose();
    Y.row(j) = mevo::sample_box_point(box, 12, uint64_t(j)).transpose();
  }

  auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd serial = model.forward_batch(X, false);
  const double ts = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd par = model.forward_batch(X, true);
  const double tp = ms_since(t0);
  row("network forward batch", "J=20000 n=7 K=2", ts, tp,
      (serial.array() == par.array()).all());

  t0 = std::chrono::steady_clock::now();
  const double ls = model.loss(X, Y, false);
  const double tls = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const double lp = model.loss(X, Y, true);
  const double tlp = ms_since(t0);
  row("training loss", "J=20000 n=7 K=2", tls, tlp, ls == lp);
}

void bench_probes() {
  const mevo::BasisPtr rt =
      mevo::make_basis(mevo::interval(0.0, 2.0 * kPi, mevo::Boundary::Periodic),
                       mevo::BasisKind::RealTrig, 3);
  mevo::ResNetConfig rc;
  rc.n = 7;
  rc.blocks = 2;
  rc.seed = 8;
  const mevo::ResNet model = mevo::ResNet::init(rc);
  mevo::ModalBox box;
  box.lo = Eigen::VectorXd::Constant(7, -1.0);
  box.hi = Eigen::VectorXd::Constant(7, 1.0);
  const mevo::PdeSpec pde = mevo::PdeSpec::advection(1.0);

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = mevo::estimate_operators(model, rt, pde, 0.1, box, 20000, 5, {}, false);
  const double ts = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto par = mevo::estimate_operators(model, rt, pde, 0.1, box, 20000, 5, {}, true);
  const double tp = ms_since(t0);
  const bool match = serial.eps_dnn == par.eps_dnn && serial.norm_n == par.norm_n &&
                     serial.norm_pe == par.norm_pe;
  row("operator probes", "10^4x2 draws n=7", ts, tp, match);
}

}  // namespace

int main() {
  std::printf("workers available: %d\n\n", mevo::max_threads());
  std::printf("%-28s %-18s %10s %10s %9s  %s\n", "kernel", "size", "serial ms",
              "parallel ms", "speedup", "result");
  bench_generate();
  bench_network();
  bench_probes();
  if (failures > 0) {
    std::printf("\n%d kernel(s) diverged between serial and parallel paths\n", failures);
    return 1;
  }
  std::printf("\nall parallel kernels reproduce the serial reference bitwise\n");
  return 0;
}
