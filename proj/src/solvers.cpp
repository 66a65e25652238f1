#include "mevo/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mevo/errors.hpp"

namespace mevo {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

std::string to_string(PdeKind k) {
  switch (k) {
    case PdeKind::Advection: return "advection";
    case PdeKind::Diffusion: return "diffusion";
    case PdeKind::ViscousBurgers: return "viscous-burgers";
    case PdeKind::InviscidBurgers: return "inviscid-burgers";
    case PdeKind::AdvectionDiffusion2d: return "advection-diffusion-2d";
  }
  return "?";
}

PdeKind pde_kind_from_string(const std::string& s) {
  if (s == "advection") return PdeKind::Advection;
  if (s == "diffusion") return PdeKind::Diffusion;
  if (s == "viscous-burgers") return PdeKind::ViscousBurgers;
  if (s == "inviscid-burgers") return PdeKind::InviscidBurgers;
  if (s == "advection-diffusion-2d") return PdeKind::AdvectionDiffusion2d;
  throw ConfigError("unknown equation kind: " + s);
}

PdeSpec PdeSpec::advection(double c) {
  PdeSpec s;
  s.kind = PdeKind::Advection;
  s.alpha[0] = c;
  return s;
}

PdeSpec PdeSpec::diffusion(double sigma) {
  PdeSpec s;
  s.kind = PdeKind::Diffusion;
  s.sigma[0] = sigma;
  return s;
}

PdeSpec PdeSpec::viscous_burgers(double sigma) {
  PdeSpec s;
  s.kind = PdeKind::ViscousBurgers;
  s.sigma[0] = sigma;
  return s;
}

PdeSpec PdeSpec::inviscid_burgers() {
  PdeSpec s;
  s.kind = PdeKind::InviscidBurgers;
  return s;
}

PdeSpec PdeSpec::advection_diffusion_2d(double a1, double a2, double s1, double s2) {
  PdeSpec s;
  s.kind = PdeKind::AdvectionDiffusion2d;
  s.alpha = {a1, a2};
  s.sigma = {s1, s2};
  return s;
}

void SolverConfig::validate() const {
  if (grid < 8) throw ConfigError("solver grid must have at least 8 points");
  if (dt < 0) throw ConfigError("solver dt must be >= 0");
  if (!(cfl > 0) || cfl > 1.0) throw ConfigError("solver cfl must lie in (0, 1]");
  if (galerkin_substeps < 1) throw ConfigError("galerkin substeps must be >= 1");
}

namespace {

// Angular frequency per unit wavenumber on each axis (1 for the sine families,
// 2 pi / L for the periodic ones). Mirrors the basis evaluation convention.
std::array<double, 2> basis_omega(const Basis& basis) {
  std::array<double, 2> w = {1.0, 1.0};
  if (basis.kind() == BasisKind::Sine) return w;
  for (int a = 0; a < basis.domain().dims; ++a)
    w[a] = kTwoPi / basis.domain().length(a);
  return w;
}

double mode_decay_rate(const ModeInfo& m, const std::array<double, 2>& omega,
                       const PdeSpec& spec, int dims) {
  double r = 0.0;
  for (int a = 0; a < dims; ++a) {
    const double kw = m.k[a] * omega[a];
    r += spec.sigma[a] * kw * kw;
  }
  return r;
}

void require_closed_form(const Basis& basis, const char* what) {
  if (basis.kind() == BasisKind::CustomOrthonormalized)
    throw ConfigError(std::string(what) + " requires a closed-form basis");
}

}  // namespace

Eigen::VectorXd exact_modal_step(const Basis& basis, const Eigen::VectorXd& v, double t,
                                 const PdeSpec& spec) {
  if (!spec.linear())
    throw ConfigError("exact modal propagation exists only for the linear equations");
  require_closed_form(basis, "exact modal propagation");
  if (v.size() != basis.n()) throw ConfigError("coefficient vector length mismatch");
  const int dims = basis.domain().dims;
  const auto omega = basis_omega(basis);

  // Decay each mode, then evaluate the shifted functions on the quadrature
  // grid and re-project. The quadrature is exact for these products, so this
  // equals the analytic propagator to rounding.
  Eigen::VectorXd decayed = v;
  const auto& modes = basis.modes();
  for (int j = 0; j < basis.n(); ++j)
    decayed(j) *= std::exp(-t * mode_decay_rate(modes[j], omega, spec, dims));

  bool any_shift = false;
  for (int a = 0; a < dims; ++a) any_shift |= spec.alpha[a] != 0.0;
  if (!any_shift) return decayed;

  Eigen::MatrixXd shifted = basis.grid();
  for (int a = 0; a < dims; ++a) shifted.col(a).array() -= spec.alpha[a] * t;
  Eigen::VectorXd field = basis.eval_on(shifted).transpose() * decayed;
  return basis.values() * basis.weights().cwiseProduct(field);
}

Eigen::VectorXd fourier_grid(int m) {
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i) x(i) = -kPi + kTwoPi * i / m;
  return x;
}

Eigen::VectorXd cell_center_grid(int m) {
  Eigen::VectorXd x(m);
  const double dx = kTwoPi / m;
  for (int i = 0; i < m; ++i) x(i) = -kPi + (i + 0.5) * dx;
  return x;
}

namespace {

bool power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

// Number of equal steps covering `t` with step at most dt_max.
int step_count(double t, double dt_max) {
  if (!(t > 0)) return 0;
  return std::max(1, int(std::ceil(t / dt_max - 1e-12)));
}

struct SpectralBurgers {
  int m;
  double sigma;
  Fft fft;
  Eigen::VectorXd k;        // signed integer wavenumbers in FFT index order
  Eigen::VectorXd mask;     // 2/3-rule dealiasing mask
  explicit SpectralBurgers(int m_, double sigma_) : m(m_), sigma(sigma_), fft(m_) {
    k.resize(m);
    mask.resize(m);
    for (int j = 0; j < m; ++j) {
      const int kk = j <= m / 2 ? j : j - m;
      k(j) = kk;
      mask(j) = std::abs(kk) <= m / 3 ? 1.0 : 0.0;
    }
  }

  using Cvec = std::vector<std::complex<double>>;

  // Spectral right side of the advective term: -i k F[u^2/2], dealiased.
  void nonlinear(const Cvec& w, Cvec& out) const {
    out = w;
    for (int j = 0; j < m; ++j) out[j] *= mask(j);
    fft.inverse(out.data());
    for (int j = 0; j < m; ++j) {
      const double u = out[j].real();
      out[j] = {0.5 * u * u, 0.0};
    }
    fft.forward(out.data());
    for (int j = 0; j < m; ++j)
      out[j] = std::complex<double>(0.0, -k(j)) * out[j] * mask(j);
  }

  // One integrating-factor RK4 step of size dt on the spectrum.
  void step(Cvec& uh, double dt, const Eigen::VectorXd& e1,
            const Eigen::VectorXd& e2) const {
    Cvec k1(m), k2(m), k3(m), k4(m), tmp(m);
    nonlinear(uh, k1);
    for (int j = 0; j < m; ++j) tmp[j] = (uh[j] + 0.5 * dt * k1[j]) * e2(j);
    nonlinear(tmp, k2);
    for (int j = 0; j < m; ++j) tmp[j] = uh[j] * e2(j) + 0.5 * dt * k2[j];
    nonlinear(tmp, k3);
    for (int j = 0; j < m; ++j) tmp[j] = uh[j] * e1(j) + dt * k3[j] * e2(j);
    nonlinear(tmp, k4);
    for (int j = 0; j < m; ++j)
      uh[j] = uh[j] * e1(j) +
              dt / 6.0 * (k1[j] * e1(j) + 2.0 * (k2[j] + k3[j]) * e2(j) + k4[j]);
  }
};

}  // namespace

std::vector<Eigen::VectorXd> viscous_burgers_march(const Eigen::VectorXd& u0, double delta,
                                                   int steps, double sigma,
                                                   const SolverConfig& cfg) {
  cfg.validate();
  if (!power_of_two(cfg.grid))
    throw ConfigError("pseudo-spectral solver needs a power-of-two grid, got " +
                      std::to_string(cfg.grid));
  if (u0.size() != cfg.grid)
    throw ConfigError("initial data length " + std::to_string(u0.size()) +
                      " does not match solver grid " + std::to_string(cfg.grid));
  if (!(delta > 0) || steps < 0) throw ConfigError("march needs delta > 0 and steps >= 0");

  const int m = cfg.grid;
  SpectralBurgers s(m, sigma);

  // Fixed step from the advective CFL of the initial data (the sup norm does
  // not grow for this equation); stiff diffusion is handled by the
  // integrating factor, so no parabolic restriction applies.
  const double dx = kTwoPi / m;
  const double umax = std::max(u0.cwiseAbs().maxCoeff(), 1e-12);
  const double dt_max = cfg.dt > 0 ? cfg.dt : cfg.cfl * dx / umax;
  const int nsub = step_count(delta, dt_max);
  const double dt = delta / nsub;

  Eigen::VectorXd e1(m), e2(m);
  for (int j = 0; j < m; ++j) {
    const double lam = sigma * s.k(j) * s.k(j);
    e1(j) = std::exp(-lam * dt);
    e2(j) = std::exp(-lam * dt * 0.5);
  }

  SpectralBurgers::Cvec uh(m);
  for (int j = 0; j < m; ++j) uh[j] = {u0(j), 0.0};
  s.fft.forward(uh.data());

  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  out.push_back(u0);
  SpectralBurgers::Cvec phys(m);
  for (int leg = 0; leg < steps; ++leg) {
    for (int it = 0; it < nsub; ++it) s.step(uh, dt, e1, e2);
    phys = uh;
    s.fft.inverse(phys.data());
    Eigen::VectorXd u(m);
    for (int j = 0; j < m; ++j) u(j) = phys[j].real();
    if (!u.allFinite())
      throw NumericError("pseudo-spectral solver produced non-finite values at t = " +
                         std::to_string(delta * (leg + 1)));
    out.push_back(std::move(u));
  }
  return out;
}

Eigen::VectorXd viscous_burgers_evolve(const Eigen::VectorXd& u0, double t, double sigma,
                                       const SolverConfig& cfg) {
  if (!(t > 0)) return u0;
  return viscous_burgers_march(u0, t, 1, sigma, cfg).back();
}

namespace {

inline double minmod(double a, double b) {
  if (a > 0 && b > 0) return std::min(a, b);
  if (a < 0 && b < 0) return std::max(a, b);
  return 0.0;
}

inline double godunov_flux(double ul, double ur) {
  // Exact Riemann flux for f(u) = u^2/2.
  const double fl = std::max(ul, 0.0), fr = std::min(ur, 0.0);
  return std::max(0.5 * fl * fl, 0.5 * fr * fr);
}

struct FvStage {
  Eigen::VectorXd rate;  // -(F_{i+1/2} - F_{i-1/2}) / dx
  double flux_left, flux_right;
};

// Flux-form update rate with minmod MUSCL reconstruction and zero ghosts.
FvStage fv_rate(const Eigen::VectorXd& u, double dx) {
  const int m = int(u.size());
  auto cell = [&](int i) { return (i < 0 || i >= m) ? 0.0 : u(i); };
  Eigen::VectorXd flux(m + 1);  // flux(i) = F_{i-1/2}
  for (int i = 0; i <= m; ++i) {
    const int l = i - 1, r = i;
    const double sl = minmod(cell(l) - cell(l - 1), cell(l + 1) - cell(l));
    const double sr = minmod(cell(r) - cell(r - 1), cell(r + 1) - cell(r));
    flux(i) = godunov_flux(cell(l) + 0.5 * sl, cell(r) - 0.5 * sr);
  }
  FvStage st;
  st.rate.resize(m);
  for (int i = 0; i < m; ++i) st.rate(i) = -(flux(i + 1) - flux(i)) / dx;
  st.flux_left = flux(0);
  st.flux_right = flux(m);
  return st;
}

}  // namespace

std::vector<Eigen::VectorXd> inviscid_burgers_march(const Eigen::VectorXd& u0, double delta,
                                                    int steps, const SolverConfig& cfg,
                                                    FvDiagnostics* diag) {
  cfg.validate();
  if (u0.size() != cfg.grid)
    throw ConfigError("initial data length " + std::to_string(u0.size()) +
                      " does not match solver grid " + std::to_string(cfg.grid));
  if (!(delta > 0) || steps < 0) throw ConfigError("march needs delta > 0 and steps >= 0");

  const int m = cfg.grid;
  const double dx = kTwoPi / m;
  const double umax = std::max(u0.cwiseAbs().maxCoeff(), 1e-12);
  const double dt_max = cfg.dt > 0 ? cfg.dt : cfg.cfl * dx / umax;
  const int nsub = step_count(delta, dt_max);
  const double dt = delta / nsub;

  FvDiagnostics d;
  d.min_u = u0.minCoeff();
  d.max_u = u0.maxCoeff();

  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  out.push_back(u0);
  Eigen::VectorXd u = u0;
  for (int leg = 0; leg < steps; ++leg) {
    for (int it = 0; it < nsub; ++it) {
      // Heun's method; each stage is in flux form, so the combination is too.
      const double mass_before = u.sum() * dx;
      FvStage s1 = fv_rate(u, dx);
      Eigen::VectorXd u1 = u + dt * s1.rate;
      FvStage s2 = fv_rate(u1, dx);
      u = 0.5 * (u + u1 + dt * s2.rate);
      const double mass_after = u.sum() * dx;
      const double boundary = 0.5 * dt *
          ((s1.flux_left + s2.flux_left) - (s1.flux_right + s2.flux_right));
      d.max_mass_defect =
          std::max(d.max_mass_defect, std::abs(mass_after - mass_before - boundary));
      d.min_u = std::min(d.min_u, u.minCoeff());
      d.max_u = std::max(d.max_u, u.maxCoeff());
      ++d.steps;
    }
    if (!u.allFinite())
      throw NumericError("finite-volume solver produced non-finite values at t = " +
                         std::to_string(delta * (leg + 1)));
    out.push_back(u);
  }
  if (diag) *diag = d;
  return out;
}

Eigen::VectorXd inviscid_burgers_evolve(const Eigen::VectorXd& u0, double t,
                                        const SolverConfig& cfg, FvDiagnostics* diag) {
  if (!(t > 0)) return u0;
  return inviscid_burgers_march(u0, t, 1, cfg, diag).back();
}

ModalEvolver::ModalEvolver(BasisPtr basis, const PdeSpec& spec, const SolverConfig& cfg)
    : basis_(std::move(basis)), spec_(spec), cfg_(cfg) {
  cfg_.validate();
  if (spec_.linear()) return;  // closed-form path needs no grid operators
  require_closed_form(*basis_, "modal evolution of the nonlinear equations");
  if (basis_->domain().dims != 1)
    throw ConfigError("the Burgers solvers are one-dimensional");
  const bool spectral = spec_.kind == PdeKind::ViscousBurgers;
  Eigen::VectorXd x = spectral ? fourier_grid(cfg_.grid) : cell_center_grid(cfg_.grid);
  Eigen::MatrixXd pts(x.size(), 1);
  pts.col(0) = x;
  lift_ = basis_->eval_on(pts);  // n x M
  // Uniform nodes over the period: equal-weight quadrature, exact for the
  // trig products that appear in the projection.
  const double w = kTwoPi / cfg_.grid;
  project_ = w * lift_;
}

Eigen::VectorXd ModalEvolver::step(const Eigen::VectorXd& v, double delta) const {
  return series(v, delta, 1).back();
}

std::vector<Eigen::VectorXd> ModalEvolver::series(const Eigen::VectorXd& v0, double delta,
                                                  int steps) const {
  if (v0.size() != basis_->n()) throw ConfigError("coefficient vector length mismatch");
  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  if (spec_.linear()) {
    out.push_back(v0);
    for (int k = 1; k <= steps; ++k)
      out.push_back(exact_modal_step(*basis_, out.back(), delta, spec_));
    return out;
  }
  Eigen::VectorXd u0 = lift_.transpose() * v0;
  std::vector<Eigen::VectorXd> grid_series =
      spec_.kind == PdeKind::ViscousBurgers
          ? viscous_burgers_march(u0, delta, steps, spec_.sigma[0], cfg_)
          : inviscid_burgers_march(u0, delta, steps, cfg_);
  out.push_back(v0);  // the exact coefficients at t = 0
  for (int k = 1; k <= steps; ++k) out.push_back(project_ * grid_series[k]);
  return out;
}

Trajectory galerkin_rollout(const BasisPtr& basis, const Eigen::VectorXd& v0, double delta,
                            int steps, const PdeSpec& spec, const SolverConfig& cfg) {
  cfg.validate();
  require_closed_form(*basis, "galerkin integration");
  if (v0.size() != basis->n()) throw ConfigError("coefficient vector length mismatch");
  if (!(delta > 0) || steps < 0)
    throw ConfigError("galerkin rollout needs delta > 0 and steps >= 0");
  const int n = basis->n();
  const int dims = basis->domain().dims;
  const auto omega = basis_omega(*basis);
  const auto& modes = basis->modes();

  // Enriched quadrature: the nonlinear term integrates products of bandwidth
  // 3 kmax, beyond what the basis's own rule guarantees.
  Quadrature quad;
  for (int a = 0; a < dims; ++a) {
    const int kmax = basis->max_wavenumber(a);
    const double lo = basis->domain().lo[a], hi = basis->domain().hi[a];
    if (basis->domain().boundary[a] == Boundary::Periodic)
      quad.axes.push_back(uniform_periodic_rule(lo, hi, std::max(6 * kmax + 4, 64)));
    else
      quad.axes.push_back(gauss_legendre_rule(
          lo, hi,
          std::max(4 * kmax + 1, int(std::ceil(2.5 * 3 * kmax * (hi - lo) / kPi)) + 12)));
  }
  Eigen::Index q = Eigen::Index(quad.grid_size());
  Eigen::MatrixXd pts(q, dims);
  Eigen::VectorXd wq(q);
  if (dims == 1) {
    for (Eigen::Index i = 0; i < q; ++i) {
      pts(i, 0) = quad.axes[0].nodes[i];
      wq(i) = quad.axes[0].weights[i];
    }
  } else {
    const std::size_t nx = quad.axes[0].nodes.size(), ny = quad.axes[1].nodes.size();
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const Eigen::Index f = Eigen::Index(iy * nx + ix);
        pts(f, 0) = quad.axes[0].nodes[ix];
        pts(f, 1) = quad.axes[1].nodes[iy];
        wq(f) = quad.axes[0].weights[ix] * quad.axes[1].weights[iy];
      }
  }
  Eigen::MatrixXd phi = basis->eval_on(pts);  // n x q

  // Diffusion is diagonal for these eigenbases.
  Eigen::VectorXd decay(n);
  for (int j = 0; j < n; ++j) decay(j) = mode_decay_rate(modes[j], omega, spec, dims);

  const bool burgers =
      spec.kind == PdeKind::ViscousBurgers || spec.kind == PdeKind::InviscidBurgers;
  Eigen::MatrixXd dphi0;  // x-derivatives, used by the nonlinear term
  Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(n, n);
  if (burgers) {
    dphi0 = basis->eval_deriv_on(pts, 0);
  } else {
    for (int a = 0; a < dims; ++a) {
      if (spec.alpha[a] == 0.0) continue;
      Eigen::MatrixXd dphi = basis->eval_deriv_on(pts, a);
      lin.noalias() -= spec.alpha[a] * (phi * wq.asDiagonal() * dphi.transpose());
    }
  }
  lin -= decay.asDiagonal();

  auto rhs = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    if (!burgers) return lin * v;
    Eigen::VectorXd u = phi.transpose() * v;
    Eigen::VectorXd half_sq = 0.5 * u.array().square().matrix();
    return dphi0 * wq.cwiseProduct(half_sq) + lin * v;
  };

  // Explicit RK4: respect the stiffest diffusion rate as well as the
  // configured substep floor.
  int nsub = cfg.galerkin_substeps;
  const double lam = decay.size() ? decay.maxCoeff() : 0.0;
  if (lam > 0) nsub = std::max(nsub, int(std::ceil(delta * lam / 1.0)));
  const double dt = delta / nsub;

  Trajectory traj;
  traj.kind = TrajKind::Galerkin;
  traj.basis = basis;
  traj.delta = delta;
  traj.v.push_back(v0);
  Eigen::VectorXd v = v0;
  for (int kstep = 1; kstep <= steps; ++kstep) {
    for (int it = 0; it < nsub; ++it) {
      Eigen::VectorXd r1 = rhs(v);
      Eigen::VectorXd r2 = rhs(v + 0.5 * dt * r1);
      Eigen::VectorXd r3 = rhs(v + 0.5 * dt * r2);
      Eigen::VectorXd r4 = rhs(v + dt * r3);
      v += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    }
    if (!v.allFinite() || v.norm() > 1e6)
      throw NumericError("galerkin solution exceeded the divergence guard at step " +
                         std::to_string(kstep) + " (t = " + std::to_string(delta * kstep) +
                         ")");
    traj.v.push_back(v);
  }
  return traj;
}

}  // namespace mevo
