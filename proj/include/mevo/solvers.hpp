#pragma once

// Reference dynamics: closed-form modal propagators for the linear equations,
// grid solvers for the Burgers equations, a modal-space evolver that routes
// through whichever is appropriate, and a Galerkin ODE integrator.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mevo/basis.hpp"
#include "mevo/fft.hpp"
#include "mevo/trajectory.hpp"

namespace mevo {

enum class PdeKind {
  Advection,            // u_t + c u_x = 0, periodic
  Diffusion,            // u_t = sigma u_xx, homogeneous dirichlet
  ViscousBurgers,       // u_t + (u^2/2)_x = sigma u_xx, homogeneous dirichlet
  InviscidBurgers,      // u_t + (u^2/2)_x = 0, homogeneous dirichlet
  AdvectionDiffusion2d  // u_t + a1 u_x + a2 u_y = s1 u_xx + s2 u_yy, periodic
};

std::string to_string(PdeKind k);
PdeKind pde_kind_from_string(const std::string& s);

struct PdeSpec {
  PdeKind kind = PdeKind::Advection;
  // Transport speed and diffusivity per axis; 1-d equations use index 0.
  std::array<double, 2> alpha = {0.0, 0.0};
  std::array<double, 2> sigma = {0.0, 0.0};

  bool linear() const {
    return kind != PdeKind::ViscousBurgers && kind != PdeKind::InviscidBurgers;
  }

  static PdeSpec advection(double c);
  static PdeSpec diffusion(double sigma);
  static PdeSpec viscous_burgers(double sigma);
  static PdeSpec inviscid_burgers();
  static PdeSpec advection_diffusion_2d(double a1, double a2, double s1, double s2);
};

struct SolverConfig {
  int grid = 512;      // grid points per axis for the Burgers solvers
  double dt = 0.0;     // fixed time step; 0 picks one from the CFL condition
  double cfl = 0.4;
  int galerkin_substeps = 50;  // minimum RK4 substeps per lag interval
  void validate() const;
};

// --- closed-form propagation in modal space (linear equations only) ---

// Applies the solution operator over time t to the coefficient vector v.
// Transport shifts the basis functions, diffusion scales each mode by
// exp(-t * sum_axis sigma_axis * wavenumber^2); exact for the trig bases.
Eigen::VectorXd exact_modal_step(const Basis& basis, const Eigen::VectorXd& v, double t,
                                 const PdeSpec& spec);

// --- grid solvers on (-pi, pi) for the Burgers equations ---

// Uniform periodic nodes x_i = -pi + 2 pi i / m (pseudo-spectral sampling).
Eigen::VectorXd fourier_grid(int m);
// Cell centers x_i = -pi + (i + 1/2) 2 pi / m (finite-volume sampling).
Eigen::VectorXd cell_center_grid(int m);

// Pseudo-spectral solver: odd data on the periodic extension satisfies the
// dirichlet condition automatically. Integrating-factor RK4 in time with 2/3
// dealiasing. u0 sampled on fourier_grid(cfg.grid); cfg.grid must be a power
// of two. Returns the field at time t on the same nodes.
Eigen::VectorXd viscous_burgers_evolve(const Eigen::VectorXd& u0, double t, double sigma,
                                       const SolverConfig& cfg);
// Same march, capturing a snapshot every `delta` (steps+1 snapshots total).
std::vector<Eigen::VectorXd> viscous_burgers_march(const Eigen::VectorXd& u0, double delta,
                                                   int steps, double sigma,
                                                   const SolverConfig& cfg);

struct FvDiagnostics {
  double max_mass_defect = 0.0;  // worst per-step deviation from the flux balance
  double min_u = 0.0, max_u = 0.0;  // range over the whole march
  int steps = 0;
};

// Godunov flux with minmod-limited reconstruction and SSP-RK2 stepping; zero
// ghost states realize the dirichlet boundary. u0 holds cell averages on
// cell_center_grid(cfg.grid).
Eigen::VectorXd inviscid_burgers_evolve(const Eigen::VectorXd& u0, double t,
                                        const SolverConfig& cfg,
                                        FvDiagnostics* diag = nullptr);
std::vector<Eigen::VectorXd> inviscid_burgers_march(const Eigen::VectorXd& u0, double delta,
                                                    int steps, const SolverConfig& cfg,
                                                    FvDiagnostics* diag = nullptr);

// --- modal-space evolution through the appropriate reference solver ---

// Lifts coefficients onto the solver grid, propagates one lag, projects back.
// Construction precomputes the lift/projection operators; step() is const and
// safe to call concurrently.
class ModalEvolver {
 public:
  ModalEvolver(BasisPtr basis, const PdeSpec& spec, const SolverConfig& cfg);

  const BasisPtr& basis() const { return basis_; }
  const PdeSpec& spec() const { return spec_; }

  Eigen::VectorXd step(const Eigen::VectorXd& v, double delta) const;
  // steps+1 coefficient vectors, marching the grid solution continuously for
  // the nonlinear equations (no re-projection between snapshots).
  std::vector<Eigen::VectorXd> series(const Eigen::VectorXd& v0, double delta,
                                      int steps) const;

 private:
  BasisPtr basis_;
  PdeSpec spec_;
  SolverConfig cfg_;
  Eigen::MatrixXd lift_;     // grid values = lift_^T * v  (n x M)
  Eigen::MatrixXd project_;  // v = project_ * grid values (n x M, includes weights)
};

// --- Galerkin ODE integration in the modal space ---

// dv_i/dt = <u^2/2, phi_i'> - diffusion for the Burgers equations (u the modal
// reconstruction), or the projected linear operator otherwise. RK4 substeps;
// throws NumericError naming the step when the norm passes 1e6.
Trajectory galerkin_rollout(const BasisPtr& basis, const Eigen::VectorXd& v0, double delta,
                            int steps, const PdeSpec& spec, const SolverConfig& cfg);

}  // namespace mevo
