#include "mevo/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mevo/basis.hpp"
#include "mevo/dataset.hpp"
#include "mevo/errors.hpp"
#include "mevo/experiment.hpp"
#include "mevo/parallel.hpp"
#include "mevo/prediction.hpp"
#include "mevo/resnet.hpp"
#include "mevo/sha256.hpp"
#include "mevo/solvers.hpp"
#include "mevo/trajectory.hpp"

namespace fs = std::filesystem;

namespace mevo {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string pct(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f%%", 100.0 * v);
  return buf;
}

// A failed gate marks the criterion failed but later measurements still run,
// so one report shows everything that went wrong.
struct Check {
  CriterionResult& r;
  void gate(bool ok, const std::string& what) {
    r.details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
    if (!ok) r.passed = false;
  }
  void note(const std::string& what) { r.details.push_back("      " + what); }
};

// Restores the worker count even when a criterion throws.
struct ThreadGuard {
  int prev = max_threads();
  ~ThreadGuard() { set_threads(prev); }
};

ExperimentConfig preset_config(const std::string& name, const std::string& scale,
                               const std::string& out_dir,
                               const std::vector<std::string>& overrides = {}) {
  std::string text = preset_text(name, scale);
  for (const auto& ov : overrides) text = apply_override(text, ov);
  ExperimentConfig cfg = ExperimentConfig::from_json(text, name + "." + scale);
  cfg.output = out_dir;
  return cfg;
}

void fresh_dir(const std::string& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

// Generate + train + optionally predict, skipping stages whose outputs are
// already on disk (the bound check reuses the benchmark's trained model).
void ensure_pipeline(const ExperimentConfig& cfg, bool want_predict) {
  const fs::path dir = cfg.output;
  if (!fs::exists(dir / kModelFile)) {
    if (!fs::exists(dir / kDatasetFile)) cmd_generate(cfg);
    cmd_train(cfg);
  }
  if (want_predict && !fs::exists(dir / kPredictedFile)) cmd_predict(cfg);
}

double final_train_loss(const std::string& dir) {
  std::ifstream in(fs::path(dir) / kLossFile);
  if (!in) throw FormatError("missing " + std::string(kLossFile) + " in " + dir);
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  const auto p1 = last.find(',');
  if (p1 == std::string::npos) throw FormatError("malformed loss history in " + dir);
  const auto p2 = last.find(',', p1 + 1);
  const auto len = p2 == std::string::npos ? std::string::npos : p2 - p1 - 1;
  return std::stod(last.substr(p1 + 1, len));
}

Trajectory optimal_for(const ExperimentConfig& cfg) {
  return reference_trajectory(cfg.basis, make_initial_condition(cfg.prediction.ic),
                              cfg.dataset.delta, cfg.prediction.horizon_steps, cfg.pde,
                              TrajKind::OptimalProjection, cfg.solver,
                              cfg.prediction.reference);
}

Trajectory load_run(const ExperimentConfig& cfg, const char* file) {
  return load_trajectory_csv((fs::path(cfg.output) / file).string(), cfg.basis);
}

// ---------------------------------------------------------------- criterion 1

void c1(CriterionResult& r) {
  r.title = "modal bases: gram matrix, norm isometry, projection roundtrip";
  Check ck{r};
  Timer t;

  struct Case {
    std::string label;
    BasisPtr basis;
  };
  const std::vector<Case> cases = {
      {"real-trig n=7 on (0,2pi)",
       make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3)},
      {"sine n=5 on (0,pi)",
       make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5)},
      {"sine n=9 on (-pi,pi)",
       make_basis(interval(-kPi, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 9)},
      {"tensor-trig n=25 on (-pi,pi)^2",
       make_basis(rectangle(-kPi, kPi, -kPi, kPi), BasisKind::TensorTrig2d, 25)},
  };

  const double tol = 1e-10;
  for (size_t c = 0; c < cases.size(); ++c) {
    const Basis& b = *cases[c].basis;
    const Eigen::MatrixXd& V = b.values();
    const Eigen::MatrixXd G = V * b.weights().asDiagonal() * V.transpose();
    const double gram =
        (G - Eigen::MatrixXd::Identity(b.n(), b.n())).cwiseAbs().maxCoeff();

    ModalBox box;
    box.lo = Eigen::VectorXd::Constant(b.n(), -1.0);
    box.hi = Eigen::VectorXd::Constant(b.n(), 1.0);
    double iso = 0.0, round = 0.0;
    for (uint64_t j = 0; j < 5; ++j) {
      const Eigen::VectorXd v = sample_box_point(box, 9000 + uint64_t(c), j);
      const FieldSample f = lift(ModalVector{cases[c].basis, v});
      iso = std::max(iso, std::abs(field_norm(f, b) - v.norm()));
      const Eigen::VectorXd back = project(f, cases[c].basis).v;
      round = std::max(round, (back - v).cwiseAbs().maxCoeff());
    }
    ck.gate(gram <= tol && iso <= tol && round <= tol,
            cases[c].label + ": gram " + num(gram) + ", isometry " + num(iso) +
                ", roundtrip " + num(round) + " (tol 1e-10)");
  }
  ck.gate(t.secs() <= 5.0, "finished in " + num(t.secs()) + "s (budget 5s)");
}

// ---------------------------------------------------------------- criterion 2

void c2(CriterionResult& r) {
  r.title = "network gradients match central finite differences";
  Check ck{r};
  Timer t;

  struct Shape {
    int n, blocks, depth, width;
  };
  // Tanh only: the finite-difference stencil is invalid across a relu kink,
  // so the piecewise-linear activation is checked elsewhere against an exact
  // composition oracle.
  const std::vector<Shape> shapes = {{2, 1, 1, 4},  {3, 1, 2, 5}, {4, 2, 1, 6},
                                     {2, 2, 2, 4},  {3, 2, 3, 6}, {5, 1, 1, 7},
                                     {3, 1, 1, 8},  {4, 1, 2, 5}, {2, 3, 2, 4},
                                     {6, 2, 1, 5},  {3, 3, 1, 4}, {7, 2, 3, 30}};

  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_shape;
  for (size_t i = 0; i < shapes.size(); ++i) {
    ResNetConfig rc;
    rc.n = shapes[i].n;
    rc.blocks = shapes[i].blocks;
    rc.depth = shapes[i].depth;
    rc.width = shapes[i].width;
    rc.activation = Activation::Tanh;
    rc.seed = 1000 + uint64_t(i);
    const ResNet m = ResNet::init(rc);

    const int J = 3 + int(i % 3);
    ModalBox box;
    box.lo = Eigen::VectorXd::Constant(rc.n, -1.0);
    box.hi = Eigen::VectorXd::Constant(rc.n, 1.0);
    Eigen::MatrixXd X(J, rc.n), Y(J, rc.n);
    for (int j = 0; j < J; ++j) {
      X.row(j) = sample_box_point(box, 500 + uint64_t(i), uint64_t(j)).transpose();
      Y.row(j) = sample_box_point(box, 600 + uint64_t(i), uint64_t(j)).transpose();
    }

    ResNet::Gradients g;
    m.backward(X, Y, g);
    Eigen::VectorXd ga;
    g.to_flat(ga);

    Eigen::VectorXd flat;
    m.to_flat(flat);
    ResNet probe = m;
    Eigen::VectorXd gfd(flat.size());
    for (Eigen::Index p = 0; p < flat.size(); ++p) {
      const double keep = flat(p);
      flat(p) = keep + h;
      probe.from_flat(flat);
      const double lp = probe.loss(X, Y, false);
      flat(p) = keep - h;
      probe.from_flat(flat);
      const double lm = probe.loss(X, Y, false);
      flat(p) = keep;
      gfd(p) = (lp - lm) / (2.0 * h);
    }
    probe.from_flat(flat);

    const double rel = (ga - gfd).norm() / std::max(1e-12, gfd.norm());
    if (rel > worst) {
      worst = rel;
      worst_shape = "n=" + std::to_string(rc.n) + " K=" + std::to_string(rc.blocks) +
                    " depth=" + std::to_string(rc.depth) + " width=" +
                    std::to_string(rc.width);
    }
  }
  ck.note(std::to_string(shapes.size()) + " random tanh models, batches of 3-5 samples");
  ck.gate(worst <= 1e-6,
          "worst relative gradient deviation " + num(worst) + " <= 1e-6 (" + worst_shape + ")");
  ck.gate(t.secs() <= 10.0, "finished in " + num(t.secs()) + "s (budget 10s)");
}

// ---------------------------------------------------------------- criterion 3

void c3(CriterionResult& r) {
  r.title = "reference dynamics: semigroup, norms, refinement order, conservation";
  Check ck{r};
  Timer t;

  const BasisPtr rt7 =
      make_basis(interval(0.0, 2.0 * kPi, Boundary::Periodic), BasisKind::RealTrig, 3);
  const BasisPtr sine5 =
      make_basis(interval(0.0, kPi, Boundary::HomogeneousDirichlet), BasisKind::Sine, 5);
  const BasisPtr tensor =
      make_basis(rectangle(-kPi, kPi, -kPi, kPi), BasisKind::TensorTrig2d, 25);

  struct LinCase {
    std::string label;
    BasisPtr basis;
    PdeSpec pde;
  };
  const std::vector<LinCase> lin = {
      {"advection on real-trig", rt7, PdeSpec::advection(1.3)},
      {"diffusion on sine", sine5, PdeSpec::diffusion(0.1)},
      {"2d advection-diffusion on tensor-trig", tensor,
       PdeSpec::advection_diffusion_2d(1.0, 0.7, 0.1, 0.16)},
  };

  // One-lag evolution composes: E(t1+t2) = E(t2) E(t1).
  for (size_t c = 0; c < lin.size(); ++c) {
    ModalBox box;
    box.lo = Eigen::VectorXd::Constant(lin[c].basis->n(), -1.0);
    box.hi = Eigen::VectorXd::Constant(lin[c].basis->n(), 1.0);
    double dev = 0.0;
    for (uint64_t j = 0; j < 3; ++j) {
      const Eigen::VectorXd v = sample_box_point(box, 7000 + uint64_t(c), j);
      const double t1 = 0.37, t2 = 0.59;
      const Eigen::VectorXd two =
          exact_modal_step(*lin[c].basis, exact_modal_step(*lin[c].basis, v, t1, lin[c].pde),
                           t2, lin[c].pde);
      const Eigen::VectorXd one = exact_modal_step(*lin[c].basis, v, t1 + t2, lin[c].pde);
      dev = std::max(dev, (two - one).cwiseAbs().maxCoeff());
    }
    ck.gate(dev <= 1e-12, lin[c].label + ": semigroup deviation " + num(dev) + " <= 1e-12");
  }

  // Pure transport preserves the l2 norm; pure decay strictly shrinks it.
  {
    ModalBox box;
    box.lo = Eigen::VectorXd::Constant(rt7->n(), -1.0);
    box.hi = Eigen::VectorXd::Constant(rt7->n(), 1.0);
    double ndev = 0.0;
    bool contracts = true;
    for (uint64_t j = 0; j < 4; ++j) {
      const double tt = 0.1 + 0.3 * double(j);
      Eigen::VectorXd v = sample_box_point(box, 7100, j);
      ndev = std::max(ndev, std::abs(exact_modal_step(*rt7, v, tt, PdeSpec::advection(1.3)).norm() -
                                     v.norm()));
      Eigen::VectorXd w = sample_box_point(box, 7200, j).head(sine5->n()).eval();
      if (w.norm() == 0.0) w.setOnes();
      contracts = contracts &&
                  exact_modal_step(*sine5, w, tt, PdeSpec::diffusion(0.1)).norm() < w.norm();
    }
    ck.gate(ndev <= 1e-13, "advection norm preservation: deviation " + num(ndev) + " <= 1e-13");
    ck.gate(contracts, "diffusion strictly contracts the modal norm");
  }

  // Fixed-step refinement of the pseudo-spectral march, u0 = -sin x to t = 0.5.
  {
    const int m = 256;
    const Eigen::VectorXd x = fourier_grid(m);
    const Eigen::VectorXd u0 = (-x.array().sin()).matrix();
    auto run = [&](double dt) {
      SolverConfig sc;
      sc.grid = m;
      sc.dt = dt;
      return viscous_burgers_march(u0, 0.5, 1, 0.1, sc).back();
    };
    // Coarse enough that truncation error stays two decades above roundoff:
    // the integrating-factor stepper converges near fourth order, so by
    // dt = 5e-4 the error already sits at the 1e-13 accumulation floor.
    const Eigen::VectorXd ref = run(2.5e-4);
    const double base = 8e-3;
    std::vector<double> errs;
    for (int lvl = 0; lvl < 3; ++lvl)
      errs.push_back((run(base / (1 << lvl)) - ref).cwiseAbs().maxCoeff());
    const double o1 = std::log2(errs[0] / errs[1]);
    const double o2 = std::log2(errs[1] / errs[2]);
    ck.gate(o1 >= 2.0 && o2 >= 2.0,
            "viscous march refinement orders " + num(o1) + ", " + num(o2) +
                " >= 2 over dt = 8e-3, 4e-3, 2e-3 (errors " + num(errs[0]) + ", " +
                num(errs[1]) + ", " + num(errs[2]) + ")");
  }

  // Finite-volume march through shock formation: flux balance and range.
  {
    const int m = 1024;
    const Eigen::VectorXd x = cell_center_grid(m);
    const Eigen::VectorXd u0 = (-x.array().sin()).matrix();
    SolverConfig sc;
    sc.grid = m;
    FvDiagnostics diag;
    inviscid_burgers_march(u0, 0.05, 30, sc, &diag);
    ck.gate(diag.max_mass_defect <= 1e-10,
            "finite-volume flux balance defect " + num(diag.max_mass_defect) +
                " <= 1e-10 per step (" + std::to_string(diag.steps) + " steps to t = 1.5)");
    const bool in_range = diag.min_u >= u0.minCoeff() - 1e-12 &&
                          diag.max_u <= u0.maxCoeff() + 1e-12;
    ck.gate(in_range, "range [" + num(diag.min_u) + ", " + num(diag.max_u) +
                          "] stays inside the initial range (max principle)");
  }

  ck.gate(t.secs() <= 60.0, "finished in " + num(t.secs()) + "s (budget 60s)");
}

// ---------------------------------------------------------------- criterion 4

void c4(CriterionResult& r, const std::string& scratch) {
  r.title = "advection run: training loss and rollout accuracy to t = 20";
  Check ck{r};
  Timer t;

  const std::string dir = scratch + "/ex1";
  fresh_dir(dir);
  const ExperimentConfig cfg = preset_config("ex1-advection", "desk", dir);
  cmd_generate(cfg);
  cmd_train(cfg);
  cmd_predict(cfg);

  const double loss = final_train_loss(dir);
  ck.gate(loss <= 1e-5, "final training loss " + num(loss) + " <= 1e-5");

  const Trajectory pred = load_run(cfg, kPredictedFile);
  const Trajectory opt = optimal_for(cfg);
  const ErrorSeries err = relative_error(pred, opt, ErrorNorm::FieldL2);
  ck.gate(err.value[20] <= 0.02, "relative field error " + pct(err.value[20]) +
                                     " <= 2% at t = 2");
  ck.gate(err.value[100] <= 0.10, "relative field error " + pct(err.value[100]) +
                                      " <= 10% at t = 10");

  bool bounded = true;
  double worst_norm = 0.0;
  for (const auto& v : pred.v) {
    if (!v.allFinite()) bounded = false;
    worst_norm = std::max(worst_norm, v.norm());
  }
  for (double e : err.value)
    if (!std::isfinite(e)) bounded = false;
  ck.gate(bounded && worst_norm <= 1e3,
          "rollout stays finite to t = 20 (largest modal norm " + num(worst_norm) + ")");
  ck.gate(t.secs() <= 600.0, "finished in " + num(t.secs()) + "s (budget 600s)");
}

// ---------------------------------------------------------------- criterion 5

void c5(CriterionResult& r, const std::string& scratch) {
  r.title = "diffusion run: accuracy, per-mode tracking, noise ordering";
  Check ck{r};
  Timer t;

  const std::string clean_dir = scratch + "/ex2";
  fresh_dir(clean_dir);
  const ExperimentConfig cfg = preset_config("ex2-diffusion", "desk", clean_dir);
  cmd_generate(cfg);
  cmd_train(cfg);
  cmd_predict(cfg);

  const Trajectory pred = load_run(cfg, kPredictedFile);
  const Trajectory opt = optimal_for(cfg);
  const ErrorSeries err = relative_error(pred, opt, ErrorNorm::FieldL2);
  ck.gate(err.value[10] <= 0.02, "relative field error " + pct(err.value[10]) +
                                     " <= 2% at t = 1");
  ck.gate(err.value[30] <= 0.05, "relative field error " + pct(err.value[30]) +
                                     " <= 5% at t = 3");

  const int n = cfg.basis->n();
  double worst_ratio = 0.0;
  int worst_mode = 0;
  for (int i = 0; i < n; ++i) {
    double dev = 0.0, amp = 0.0;
    for (size_t k = 0; k < opt.v.size(); ++k) {
      dev = std::max(dev, std::abs(pred.v[k](i) - opt.v[k](i)));
      amp = std::max(amp, std::abs(opt.v[k](i)));
    }
    const double ratio = dev / amp;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_mode = i;
    }
  }
  ck.gate(worst_ratio <= 0.05,
          "every mode tracked within 5% of its peak (worst " + pct(worst_ratio) +
              " on mode " + std::to_string(worst_mode) + ")");

  // Same run trained on corrupted coefficients; accuracy must degrade with
  // the noise level.
  const std::string dir02 = scratch + "/ex2-noise02";
  fresh_dir(dir02);
  const ExperimentConfig cfg02 = preset_config("ex2-diffusion-noisy", "desk", dir02,
                                               {"dataset.eta=0.02"});
  cmd_generate(cfg02);
  cmd_train(cfg02);
  cmd_predict(cfg02);

  const std::string dir05 = scratch + "/ex2-noise05";
  fresh_dir(dir05);
  const ExperimentConfig cfg05 = preset_config("ex2-diffusion-noisy", "desk", dir05);
  cmd_generate(cfg05);
  cmd_train(cfg05);
  cmd_predict(cfg05);

  const double e_clean = err.value[30];
  const double e02 =
      relative_error(load_run(cfg02, kPredictedFile), opt, ErrorNorm::FieldL2).value[30];
  const double e05 =
      relative_error(load_run(cfg05, kPredictedFile), opt, ErrorNorm::FieldL2).value[30];
  ck.note("error at t = 3: clean " + pct(e_clean) + ", eta 0.02 " + pct(e02) +
          ", eta 0.05 " + pct(e05));
  ck.gate(e05 >= e02 && e02 >= e_clean, "noisier training data gives larger rollout error");
  ck.gate(t.secs() <= 600.0, "finished in " + num(t.secs()) + "s (budget 600s)");
}

// ---------------------------------------------------------------- criterion 6

void c6(CriterionResult& r, const std::string& scratch) {
  r.title = "burgers runs: viscous accuracy plus stiff and inviscid stress tests";
  Check ck{r};

  // Moderately viscous: accuracy gate at t = 2.
  {
    Timer ta;
    const std::string dir = scratch + "/ex3-sig05";
    fresh_dir(dir);
    const ExperimentConfig cfg = preset_config("ex3-burgers-sig0.5", "desk", dir);
    cmd_generate(cfg);
    cmd_train(cfg);
    cmd_predict(cfg);
    const ErrorSeries err =
        relative_error(load_run(cfg, kPredictedFile), optimal_for(cfg), ErrorNorm::FieldL2);
    ck.gate(err.value[40] <= 0.05, "sigma 0.5: relative field error " + pct(err.value[40]) +
                                       " <= 5% at t = 2");
    ck.gate(ta.secs() <= 1200.0,
            "sigma 0.5 finished in " + num(ta.secs()) + "s (budget 1200s)");
  }

  // Sharper fronts: the rollout must stay bounded even where accuracy is hard.
  {
    const std::string dir = scratch + "/ex3-sig01";
    fresh_dir(dir);
    const ExperimentConfig cfg = preset_config("ex3-burgers-sig0.1", "desk", dir);
    bool completed = true;
    std::string why;
    try {
      cmd_generate(cfg);
      cmd_train(cfg);
      cmd_predict(cfg);
      const Trajectory pred = load_run(cfg, kPredictedFile);
      for (const auto& v : pred.v)
        if (!v.allFinite()) completed = false;
    } catch (const Error& e) {
      completed = false;
      why = std::string(": ") + e.what();
    }
    ck.gate(completed, "sigma 0.1: full pipeline and rollout finite to t = 2" + why);
  }

  // Inviscid: bounded rollout, and the high modes compared against the
  // truncated modal ODE. The network beating it is a stretch target, so the
  // comparison is reported without gating the criterion.
  {
    const std::string dir = scratch + "/ex4";
    fresh_dir(dir);
    const ExperimentConfig cfg = preset_config("ex4-inviscid-burgers", "desk", dir);
    bool completed = true;
    std::string why;
    try {
      cmd_generate(cfg);
      cmd_train(cfg);
      cmd_predict(cfg);
      const Trajectory pred = load_run(cfg, kPredictedFile);
      for (const auto& v : pred.v)
        if (!v.allFinite()) completed = false;
    } catch (const Error& e) {
      completed = false;
      why = std::string(": ") + e.what();
    }
    ck.gate(completed, "inviscid: full pipeline and rollout finite to t = 2" + why);

    if (completed && fs::exists(fs::path(dir) / kGalerkinFile)) {
      const Trajectory pred = load_run(cfg, kPredictedFile);
      const Trajectory gal = load_run(cfg, kGalerkinFile);
      const Trajectory opt = optimal_for(cfg);
      double net2 = 0.0, gal2 = 0.0;
      for (size_t k = 0; k < opt.v.size(); ++k) {
        for (int i = 6; i < 9; ++i) {
          net2 += std::pow(pred.v[k](i) - opt.v[k](i), 2);
          gal2 += std::pow(gal.v[k](i) - opt.v[k](i), 2);
        }
      }
      const double net_rms = std::sqrt(net2 / double(opt.v.size()));
      const double gal_rms = std::sqrt(gal2 / double(opt.v.size()));
      ck.note("modes 7-9 vs optimal, time-averaged l2: network " + num(net_rms) +
              ", modal ODE " + num(gal_rms) +
              (net_rms < gal_rms ? " (network closer; stretch target met)"
                                 : " (modal ODE closer; stretch target not met)"));
    } else if (completed) {
      ck.note("modal ODE trajectory unavailable; high-mode comparison skipped");
    }
  }
}

// ---------------------------------------------------------------- criterion 7

void c7(CriterionResult& r, const std::string& scratch) {
  r.title = "step-error bound on the trained diffusion model";
  Check ck{r};

  const std::string dir = scratch + "/ex2";
  const ExperimentConfig cfg = preset_config("ex2-diffusion", "desk", dir);
  ensure_pipeline(cfg, false);
  const ResNet model = ResNet::load((fs::path(dir) / kModelFile).string());

  Timer tc;
  const ErrorReport rep = theorem_bound_check(
      model, cfg.basis, cfg.pde, cfg.box(), cfg.prediction.probe_count,
      cfg.prediction.probe_seed, make_initial_condition(cfg.prediction.ic),
      cfg.dataset.delta, cfg.prediction.horizon_steps, cfg.solver, cfg.prediction.reference);
  const double check_secs = tc.secs();

  ck.note(rep.probes.description);
  ck.note("one-step network deviation " + num(rep.probes.eps_dnn) + ", operator norms " +
          num(rep.probes.norm_n) + " (network) and " + num(rep.probes.norm_pe) +
          " (projected evolution)");
  ck.gate(rep.holds, "accumulated error <= bound at every step k <= " +
                         std::to_string(cfg.prediction.horizon_steps) + " (min slack " +
                         num(rep.min_slack) + ")");
  ck.gate(check_secs <= 120.0, "bound check took " + num(check_secs) + "s (budget 120s)");
}

// ---------------------------------------------------------------- criterion 8

void c8(CriterionResult& r) {
  r.title = "projected-dynamics bound for the exact linear evolutions";
  Check ck{r};
  Timer t;

  struct Case {
    std::string preset;
    std::string label;
  };
  const std::vector<Case> cases = {{"ex1-advection", "advection"},
                                   {"ex2-diffusion", "diffusion"}};
  for (const auto& c : cases) {
    const ExperimentConfig cfg = preset_config(c.preset, "desk", "");
    const PropositionReport rep = proposition_bound_check(
        cfg.basis, make_initial_condition(cfg.prediction.ic), cfg.dataset.delta, 30,
        cfg.pde, cfg.box(), cfg.prediction.probe_count, cfg.prediction.probe_seed,
        cfg.solver, cfg.prediction.reference);
    ck.gate(rep.holds, c.label + ": projected-evolution error <= bound at every step" +
                           " (min slack " + num(rep.min_slack) + ", operator norm " +
                           num(rep.norm_pe) + ")");
  }
  ck.gate(t.secs() <= 60.0, "finished in " + num(t.secs()) + "s (budget 60s)");
}

// ---------------------------------------------------------------- criterion 9

void c9(CriterionResult& r, const std::string& scratch) {
  r.title = "bitwise reproducibility of a sequential rerun";
  Check ck{r};
  ThreadGuard guard;
  set_threads(1);

  const std::string ra = scratch + "/repro-a";
  const std::string rb = scratch + "/repro-b";
  for (const std::string& dir : {ra, rb}) {
    fresh_dir(dir);
    const ExperimentConfig cfg = preset_config("ex2-diffusion", "desk", dir);
    cmd_generate(cfg);
    cmd_train(cfg);
    cmd_predict(cfg);
    cmd_analyze(cfg);
  }

  const std::vector<const char*> files = {kDatasetFile,  kBasisFile,    kModelFile,
                                          kLossFile,     kPredictedFile, kOptimalFile,
                                          kGalerkinFile, kErrorReportFile, kManifestFile};
  for (const char* f : files) {
    const fs::path pa = fs::path(ra) / f, pb = fs::path(rb) / f;
    if (!fs::exists(pa) || !fs::exists(pb)) {
      ck.gate(false, std::string(f) + ": missing from one of the runs");
      continue;
    }
    const std::string ha = sha256_file_hex(pa.string());
    const std::string hb = sha256_file_hex(pb.string());
    ck.gate(ha == hb, std::string(f) + ": " + ha.substr(0, 12) +
                          (ha == hb ? " matches rerun" : " != " + hb.substr(0, 12)));
  }
}

}  // namespace

std::vector<int> criterion_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9}; }

CriterionResult run_criterion(int id, const std::string& scratch_dir) {
  CriterionResult r;
  r.id = id;
  r.passed = true;
  fs::create_directories(scratch_dir);
  Timer t;
  try {
    switch (id) {
      case 1: c1(r); break;
      case 2: c2(r); break;
      case 3: c3(r); break;
      case 4: c4(r, scratch_dir); break;
      case 5: c5(r, scratch_dir); break;
      case 6: c6(r, scratch_dir); break;
      case 7: c7(r, scratch_dir); break;
      case 8: c8(r); break;
      case 9: c9(r, scratch_dir); break;
      default:
        throw ConfigError("unknown criterion id " + std::to_string(id) +
                          " (valid: 1..9)");
    }
  } catch (const Error& e) {
    r.passed = false;
    r.details.push_back(std::string("error: ") + e.what());
  } catch (const std::exception& e) {
    r.passed = false;
    r.details.push_back(std::string("unexpected error: ") + e.what());
  }
  r.seconds = t.secs();
  return r;
}

}  // namespace mevo
