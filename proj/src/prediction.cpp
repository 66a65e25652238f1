#include "mevo/prediction.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "mevo/errors.hpp"
#include "mevo/fft.hpp"
#include "mevo/parallel.hpp"

namespace mevo {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

void ReferenceConfig::validate() const {
  if (grid_1d < 64 || grid_2d < 16 || fv_grid < 64 || sine_modes < 16)
    throw ConfigError("reference resolutions are too small");
}

Trajectory rollout(const ResNet& model, const ModalVector& v0, double delta, int steps) {
  v0.validate();
  if (!model.valid()) throw ConfigError("rollout needs an initialized network");
  if (model.n() != v0.basis->n())
    throw ConfigError("network width " + std::to_string(model.n()) +
                      " does not match basis n = " + std::to_string(v0.basis->n()));
  if (steps < 0 || !(delta > 0))
    throw ConfigError("rollout needs steps >= 0 and delta > 0");
  Trajectory traj;
  traj.kind = TrajKind::Predicted;
  traj.basis = v0.basis;
  traj.delta = delta;
  traj.v.push_back(v0.v);
  for (int k = 1; k <= steps; ++k) {
    traj.v.push_back(model.forward(traj.v.back()));
    if (traj.v.back().norm() > 1e6)
      throw NumericError("rollout diverged (norm > 1e6) at step " + std::to_string(k) +
                         " (t = " + std::to_string(delta * k) + ")");
  }
  return traj;
}

Trajectory rollout(const ResNet& model, const FieldSample& u0, const BasisPtr& basis,
                   double delta, int steps) {
  return rollout(model, project(u0, basis), delta, steps);
}

namespace {

// Optimal-projection data at every step: coefficients of the true solution,
// its projection error, and its norm, all under one consistent discrete
// representation per equation.
struct RefSeries {
  std::vector<Eigen::VectorXd> vhat;
  std::vector<double> eps_proj, unorm;
};

// Residual norm via the discrete Pythagoras identity: with the basis
// orthonormal under the weights, |u - lift(vhat)|^2 = |u|^2 - |vhat|^2.
void push_projected(RefSeries& out, const Eigen::MatrixXd& evals, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& u) {
  Eigen::VectorXd vhat = evals * w.cwiseProduct(u);
  const double nrm2 = u.cwiseProduct(u).dot(w);
  const double eps2 = std::max(0.0, nrm2 - vhat.squaredNorm());
  out.vhat.push_back(std::move(vhat));
  out.eps_proj.push_back(std::sqrt(eps2));
  out.unorm.push_back(std::sqrt(std::max(0.0, nrm2)));
}

RefSeries advection_reference(const Basis& basis, const InitialCondition& u0, double delta,
                              int steps, const PdeSpec& pde, const ReferenceConfig& rcfg) {
  const double lo = basis.domain().lo[0], len = basis.domain().length(0);
  const int m = rcfg.grid_1d;
  Eigen::MatrixXd pts(m, 1);
  for (int i = 0; i < m; ++i) pts(i, 0) = lo + len * i / m;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(m, len / m);
  const Eigen::MatrixXd evals = basis.eval_on(pts);
  RefSeries out;
  Eigen::VectorXd u(m);
  for (int k = 0; k <= steps; ++k) {
    const double shift = pde.alpha[0] * delta * k;
    for (int i = 0; i < m; ++i) u(i) = u0.eval(pts(i, 0) - shift, 0.0);
    push_projected(out, evals, w, u);
  }
  return out;
}

// Diffusion on a Dirichlet interval: expand in the sine eigenfamily and decay
// each mode by its eigenvalue. On (-pi, pi) the family spans the odd part of
// the space, which is where every configuration in use lives.
RefSeries diffusion_sine_reference(const Basis& basis, const InitialCondition& u0,
                                   double delta, int steps, const PdeSpec& pde,
                                   const ReferenceConfig& rcfg) {
  const double lo = basis.domain().lo[0], hi = basis.domain().hi[0];
  const int nser = rcfg.sine_modes;
  // Quadrature fine enough for the highest series mode.
  const int m = int(std::ceil(2.5 * nser * (hi - lo) / kPi)) + 12;
  AxisRule rule = gauss_legendre_rule(lo, hi, m);
  const double norm = basis.domain().length(0) > kPi + 1e-9 ? 1.0 / std::sqrt(kPi)
                                                            : std::sqrt(2.0 / kPi);
  Eigen::VectorXd c(nser);
  for (int j = 1; j <= nser; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      s += rule.weights[i] * u0.eval(rule.nodes[i], 0.0) * norm * std::sin(j * rule.nodes[i]);
    c(j - 1) = s;
  }
  const int n = basis.n();
  RefSeries out;
  for (int k = 0; k <= steps; ++k) {
    const double t = delta * k;
    Eigen::VectorXd vhat(n);
    double tail2 = 0.0, total2 = 0.0;
    for (int j = 1; j <= nser; ++j) {
      const double cj = c(j - 1) * std::exp(-pde.sigma[0] * double(j) * j * t);
      total2 += cj * cj;
      if (j <= n)
        vhat(j - 1) = cj;
      else
        tail2 += cj * cj;
    }
    out.vhat.push_back(std::move(vhat));
    out.eps_proj.push_back(std::sqrt(tail2));
    out.unorm.push_back(std::sqrt(total2));
  }
  return out;
}

// Linear flow on a periodic interval: FFT the sampled start, decay and shift
// every wavenumber in closed form, transform back, project.
RefSeries periodic_spectral_reference(const Basis& basis, const InitialCondition& u0,
                                      double delta, int steps, const PdeSpec& pde,
                                      const ReferenceConfig& rcfg) {
  const double lo = basis.domain().lo[0], len = basis.domain().length(0);
  const double omega = kTwoPi / len;
  const int m = rcfg.grid_1d;
  Eigen::MatrixXd pts(m, 1);
  for (int i = 0; i < m; ++i) pts(i, 0) = lo + len * i / m;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(m, len / m);
  const Eigen::MatrixXd evals = basis.eval_on(pts);

  Fft fft(m);
  std::vector<std::complex<double>> spec(m);
  for (int i = 0; i < m; ++i) spec[i] = {u0.eval(pts(i, 0), 0.0), 0.0};
  fft.forward(spec.data());

  RefSeries out;
  std::vector<std::complex<double>> evolved(m);
  Eigen::VectorXd u(m);
  for (int k = 0; k <= steps; ++k) {
    const double t = delta * k;
    for (int i = 0; i < m; ++i) {
      const double kw = omega * (i <= m / 2 ? i : i - m);
      evolved[i] = spec[i] * std::polar(std::exp(-pde.sigma[0] * kw * kw * t),
                                        -kw * pde.alpha[0] * t);
    }
    fft.inverse(evolved.data());
    for (int i = 0; i < m; ++i) u(i) = evolved[i].real();
    push_projected(out, evals, w, u);
  }
  return out;
}

RefSeries burgers_reference(const Basis& basis, const InitialCondition& u0, double delta,
                            int steps, const PdeSpec& pde, const SolverConfig& scfg,
                            const ReferenceConfig& rcfg) {
  const bool viscous = pde.kind == PdeKind::ViscousBurgers;
  SolverConfig fine = scfg;
  fine.grid = viscous ? rcfg.grid_1d : rcfg.fv_grid;
  Eigen::VectorXd x = viscous ? fourier_grid(fine.grid) : cell_center_grid(fine.grid);
  Eigen::VectorXd start(fine.grid);
  for (int i = 0; i < fine.grid; ++i) start(i) = u0.eval(x(i), 0.0);
  std::vector<Eigen::VectorXd> fields =
      steps == 0 ? std::vector<Eigen::VectorXd>{start}
      : viscous  ? viscous_burgers_march(start, delta, steps, pde.sigma[0], fine)
                 : inviscid_burgers_march(start, delta, steps, fine);
  Eigen::MatrixXd pts(fine.grid, 1);
  pts.col(0) = x;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(fine.grid, kTwoPi / fine.grid);
  const Eigen::MatrixXd evals = basis.eval_on(pts);
  RefSeries out;
  for (const auto& u : fields) push_projected(out, evals, w, u);
  return out;
}

// In-place 2d FFT over a row-major (x fastest) grid.
void fft2(const Fft& fx, const Fft& fy, std::vector<std::complex<double>>& a, int nx,
          int ny, bool inverse) {
  for (int iy = 0; iy < ny; ++iy) {
    auto* row = a.data() + std::size_t(iy) * nx;
    inverse ? fx.inverse(row) : fx.forward(row);
  }
  std::vector<std::complex<double>> col(ny);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) col[iy] = a[std::size_t(iy) * nx + ix];
    inverse ? fy.inverse(col.data()) : fy.forward(col.data());
    for (int iy = 0; iy < ny; ++iy) a[std::size_t(iy) * nx + ix] = col[iy];
  }
}

RefSeries advdiff2d_reference(const Basis& basis, const InitialCondition& u0, double delta,
                              int steps, const PdeSpec& pde, const ReferenceConfig& rcfg) {
  const int m = rcfg.grid_2d;
  const auto& dom = basis.domain();
  Eigen::MatrixXd pts(std::size_t(m) * m, 2);
  Eigen::VectorXd w(std::size_t(m) * m);
  const double hx = dom.length(0) / m, hy = dom.length(1) / m;
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix) {
      const std::size_t q = std::size_t(iy) * m + ix;
      pts(q, 0) = dom.lo[0] + hx * ix;
      pts(q, 1) = dom.lo[1] + hy * iy;
      w(q) = hx * hy;
    }
  const Eigen::MatrixXd evals = basis.eval_on(pts);

  Fft fft(m);
  std::vector<std::complex<double>> spec(std::size_t(m) * m);
  for (std::size_t q = 0; q < spec.size(); ++q)
    spec[q] = {u0.eval(pts(q, 0), pts(q, 1)), 0.0};
  fft2(fft, fft, spec, m, m, false);

  auto wavenumber = [m](int idx) { return idx <= m / 2 ? idx : idx - m; };
  RefSeries out;
  std::vector<std::complex<double>> evolved(spec.size());
  Eigen::VectorXd u(Eigen::Index(spec.size()));
  for (int k = 0; k <= steps; ++k) {
    const double t = delta * k;
    for (int iy = 0; iy < m; ++iy)
      for (int ix = 0; ix < m; ++ix) {
        const int kx = wavenumber(ix), ky = wavenumber(iy);
        const double decay =
            std::exp(-t * (pde.sigma[0] * kx * kx + pde.sigma[1] * ky * ky));
        const double phase = -t * (pde.alpha[0] * kx + pde.alpha[1] * ky);
        evolved[std::size_t(iy) * m + ix] =
            spec[std::size_t(iy) * m + ix] * std::polar(decay, phase);
      }
    fft2(fft, fft, evolved, m, m, true);
    for (std::size_t q = 0; q < evolved.size(); ++q) u(Eigen::Index(q)) = evolved[q].real();
    push_projected(out, evals, w, u);
  }
  return out;
}

RefSeries optimal_projection_series(const Basis& basis, const InitialCondition& u0,
                                    double delta, int steps, const PdeSpec& pde,
                                    const SolverConfig& scfg,
                                    const ReferenceConfig& rcfg) {
  rcfg.validate();
  if (u0.dims != basis.domain().dims)
    throw ConfigError("initial condition dimensionality does not match the domain");
  const bool periodic = basis.domain().boundary[0] == Boundary::Periodic &&
                        (basis.domain().dims < 2 ||
                         basis.domain().boundary[1] == Boundary::Periodic);
  switch (pde.kind) {
    case PdeKind::Advection:
      if (!periodic) throw ConfigError("transport reference needs a periodic basis");
      return advection_reference(basis, u0, delta, steps, pde, rcfg);
    case PdeKind::Diffusion:
      if (basis.kind() == BasisKind::Sine)
        return diffusion_sine_reference(basis, u0, delta, steps, pde, rcfg);
      if (periodic && basis.domain().dims == 1)
        return periodic_spectral_reference(basis, u0, delta, steps, pde, rcfg);
      throw ConfigError("diffusion reference needs a sine or periodic interval basis");
    case PdeKind::ViscousBurgers:
    case PdeKind::InviscidBurgers:
      if (basis.domain().dims != 1)
        throw ConfigError("the nonlinear references are one-dimensional");
      return burgers_reference(basis, u0, delta, steps, pde, scfg, rcfg);
    case PdeKind::AdvectionDiffusion2d:
      if (basis.domain().dims != 2 || !periodic)
        throw ConfigError("the two-dimensional reference needs a periodic rectangle");
      return advdiff2d_reference(basis, u0, delta, steps, pde, rcfg);
  }
  throw ConfigError("unsupported equation kind");
}

}  // namespace

Trajectory reference_trajectory(const BasisPtr& basis, const InitialCondition& u0,
                                double delta, int steps, const PdeSpec& pde, TrajKind kind,
                                const SolverConfig& scfg, const ReferenceConfig& rcfg) {
  if (steps < 0 || !(delta > 0))
    throw ConfigError("reference trajectory needs steps >= 0 and delta > 0");
  Trajectory traj;
  traj.basis = basis;
  traj.delta = delta;
  traj.kind = kind;
  switch (kind) {
    case TrajKind::OptimalProjection: {
      RefSeries ref = optimal_projection_series(*basis, u0, delta, steps, pde, scfg, rcfg);
      traj.v = std::move(ref.vhat);
      traj.eps_proj = std::move(ref.eps_proj);
      traj.field_norms = std::move(ref.unorm);
      break;
    }
    case TrajKind::ExactModal: {
      RefSeries ref = optimal_projection_series(*basis, u0, delta, 0, pde, scfg, rcfg);
      ModalEvolver evolver(basis, pde, scfg);
      traj.v = evolver.series(ref.vhat[0], delta, steps);
      break;
    }
    case TrajKind::Galerkin: {
      RefSeries ref = optimal_projection_series(*basis, u0, delta, 0, pde, scfg, rcfg);
      traj = galerkin_rollout(basis, ref.vhat[0], delta, steps, pde, scfg);
      break;
    }
    case TrajKind::Predicted:
      throw ConfigError("predicted trajectories come from rollout(), not the reference");
  }
  traj.validate();
  return traj;
}

ErrorSeries relative_error(const Trajectory& a, const Trajectory& b, ErrorNorm norm) {
  a.validate();
  b.validate();
  if (a.v.size() != b.v.size() || std::abs(a.delta - b.delta) > 1e-12 * std::max(1.0, b.delta))
    throw ConfigError("trajectories do not share a time axis");
  if (a.basis->n() != b.basis->n())
    throw ConfigError("trajectories do not share a basis dimension");
  const bool field = norm == ErrorNorm::FieldL2;
  const bool with_proj = field && !b.eps_proj.empty();
  ErrorSeries out;
  for (std::size_t k = 0; k < a.v.size(); ++k) {
    double num2 = (a.v[k] - b.v[k]).squaredNorm();
    double den2 = b.v[k].squaredNorm();
    if (with_proj) {
      num2 += b.eps_proj[k] * b.eps_proj[k];
      den2 = b.field_norms.empty() ? den2 + b.eps_proj[k] * b.eps_proj[k]
                                   : b.field_norms[k] * b.field_norms[k];
    }
    if (den2 <= 0.0) {
      out.value.push_back(0.0);
      out.reference_zero.push_back(1);
    } else {
      out.value.push_back(std::sqrt(num2 / den2));
      out.reference_zero.push_back(0);
    }
  }
  return out;
}

ProbeEstimates estimate_operators(const ResNet& model, const BasisPtr& basis,
                                  const PdeSpec& pde, double delta, const ModalBox& box,
                                  int64_t count, uint64_t seed, const SolverConfig& scfg,
                                  bool parallel) {
  box.validate();
  if (count < 1) throw ConfigError("probe set is empty");
  if (box.dim() != basis->n())
    throw ConfigError("probe box dimension does not match the basis");
  const bool with_model = model.valid();
  if (with_model && model.n() != basis->n())
    throw ConfigError("network width does not match the basis");
  ModalEvolver evolver(basis, pde, scfg);

  // Per-index results, then a serial reduction: deterministic for any
  // worker count.
  Eigen::VectorXd dnn(count), ratio_n(count), ratio_pe(count);
  parallel_for(
      count,
      [&](int64_t j) {
        const Eigen::VectorXd v = sample_box_point(box, seed, uint64_t(j));
        const double vn = v.norm();
        const Eigen::VectorXd ev = evolver.step(v, delta);
        ratio_pe(j) = vn > 0 ? ev.norm() / vn : 0.0;
        if (with_model) {
          const Eigen::VectorXd nv = model.forward(v);
          dnn(j) = (nv - ev).norm();
          ratio_n(j) = vn > 0 ? nv.norm() / vn : 0.0;
        } else {
          dnn(j) = 0.0;
          ratio_n(j) = 0.0;
        }
      },
      parallel);
  ProbeEstimates est;
  est.probe_count = count;
  est.eps_dnn = dnn.maxCoeff();
  est.norm_n = ratio_n.maxCoeff();
  est.norm_pe = ratio_pe.maxCoeff();
  est.description = std::to_string(count) + " uniform draws from the sampling box, seed " +
                    std::to_string(seed);
  return est;
}

std::string ErrorReport::to_json() const {
  nlohmann::json j;
  j["times"] = times;
  j["coeff_err"] = coeff_err;
  j["rel_err_coeff"] = rel_err_coeff;
  j["rel_err_field"] = rel_err_field;
  j["eps_proj"] = eps_proj;
  j["bound_rhs"] = bound_rhs_coeff;
  j["bound_rhs_field"] = bound_rhs_field;
  j["eps_dnn"] = probes.eps_dnn;
  j["norm_N"] = probes.norm_n;
  j["norm_PE"] = probes.norm_pe;
  j["probe_count"] = probes.probe_count;
  j["probe_description"] = probes.description;
  j["holds"] = holds;
  j["min_slack"] = min_slack;
  return j.dump(2);
}

void ErrorReport::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write error report: " + path);
  out << to_json() << "\n";
}

ErrorReport theorem_bound_check(const ResNet& model, const BasisPtr& basis,
                                const PdeSpec& pde, const ModalBox& probe_box,
                                int64_t probe_count, uint64_t probe_seed,
                                const InitialCondition& u0, double delta, int horizon,
                                const SolverConfig& scfg, const ReferenceConfig& rcfg) {
  if (horizon < 1) throw ConfigError("bound check needs a horizon of at least one step");
  Trajectory ref = reference_trajectory(basis, u0, delta, horizon, pde,
                                        TrajKind::OptimalProjection, scfg, rcfg);
  Trajectory pred = rollout(model, ModalVector{basis, ref.v[0]}, delta, horizon);
  ProbeEstimates est = estimate_operators(model, basis, pde, delta, probe_box, probe_count,
                                          probe_seed, scfg);

  ErrorReport rep;
  rep.probes = est;
  rep.holds = true;
  rep.min_slack = std::numeric_limits<double>::infinity();
  double rhs = 0.0;  // recurrence: rhs(k+1) = |N| rhs(k) + eps_dnn |v^(k)| + eps_proj(k) |PE|
  for (int k = 0; k <= horizon; ++k) {
    const double ce = (pred.v[k] - ref.v[k]).norm();
    const double ep = ref.eps_proj[k];
    const double un = ref.field_norms[k];
    const double field_err = std::sqrt(ce * ce + ep * ep);
    // Triangle-inequality form of the decomposition; must hold on every run.
    if (field_err > ce + ep + 1e-10)
      throw NumericError("field-error decomposition identity violated at step " +
                         std::to_string(k));
    rep.times.push_back(delta * k);
    rep.coeff_err.push_back(ce);
    rep.eps_proj.push_back(ep);
    const double vn = ref.v[k].norm();
    rep.rel_err_coeff.push_back(vn > 0 ? ce / vn : -1.0);
    rep.rel_err_field.push_back(un > 0 ? field_err / un : -1.0);
    rep.bound_rhs_coeff.push_back(rhs);
    rep.bound_rhs_field.push_back(rhs + ep);
    // k = 0 is the exact 0 <= 0 identity; slack is only informative after it.
    if (k > 0) rep.min_slack = std::min(rep.min_slack, rhs - ce);
    if (ce > rhs + 1e-12) rep.holds = false;
    rhs = est.norm_n * rhs + est.eps_dnn * vn + ep * est.norm_pe;
  }
  return rep;
}

PropositionReport proposition_bound_check(const BasisPtr& basis, const InitialCondition& u0,
                                          double delta, int steps, const PdeSpec& pde,
                                          const ModalBox& probe_box, int64_t probe_count,
                                          uint64_t probe_seed, const SolverConfig& scfg,
                                          const ReferenceConfig& rcfg) {
  if (!pde.linear())
    throw ConfigError("the exact-evolution bound applies to the linear equations");
  if (steps < 1) throw ConfigError("bound check needs at least one step");
  Trajectory ref = reference_trajectory(basis, u0, delta, steps, pde,
                                        TrajKind::OptimalProjection, scfg, rcfg);
  Trajectory em = reference_trajectory(basis, u0, delta, steps, pde, TrajKind::ExactModal,
                                       scfg, rcfg);
  ProbeEstimates est = estimate_operators(ResNet{}, basis, pde, delta, probe_box,
                                          probe_count, probe_seed, scfg);
  PropositionReport rep;
  rep.norm_pe = est.norm_pe;
  rep.holds = true;
  rep.min_slack = std::numeric_limits<double>::infinity();
  double rhs = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double ce = (em.v[k] - ref.v[k]).norm();
    const double ep = ref.eps_proj[k];
    const double lhs = std::sqrt(ce * ce + ep * ep);
    rhs = est.norm_pe * rhs + ep;  // sum_{j<=k} norm_pe^{k-j} eps_proj(t_j)
    rep.times.push_back(delta * k);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    // At k = 0 both sides reduce to the projection error exactly.
    if (k > 0) rep.min_slack = std::min(rep.min_slack, rhs - lhs);
    if (lhs > rhs + 1e-10) rep.holds = false;
  }
  return rep;
}

}  // namespace mevo
