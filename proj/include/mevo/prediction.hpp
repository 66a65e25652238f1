#pragma once

// Recursive rollout of the learned operator, reference trajectories from the
// true dynamics, error series, and the empirical step-error bound checks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mevo/basis.hpp"
#include "mevo/dataset.hpp"
#include "mevo/resnet.hpp"
#include "mevo/solvers.hpp"
#include "mevo/trajectory.hpp"

namespace mevo {

// Closed-form initial condition; y is ignored for one-dimensional domains.
struct InitialCondition {
  std::string id;
  int dims = 1;
  std::function<double(double, double)> eval;
};

// Resolutions for the fine reference computations.
struct ReferenceConfig {
  int grid_1d = 2048;    // periodic fine grid / pseudo-spectral reference
  int sine_modes = 512;  // series truncation for the diffusion solution; the
                         // neglected tail is far below every tolerance in use
  int grid_2d = 256;     // per-axis fine grid in 2d
  int fv_grid = 4096;    // finite-volume reference resolution
  void validate() const;
};

// v(0) = given coefficients; v(t_{k+1}) = network(v(t_k)). Aborts with the
// step index when the norm passes 1e6.
Trajectory rollout(const ResNet& model, const ModalVector& v0, double delta, int steps);
// Field start: projected first, then as above.
Trajectory rollout(const ResNet& model, const FieldSample& u0, const BasisPtr& basis,
                   double delta, int steps);

// Reference trajectories from a closed-form initial condition:
//   OptimalProjection  projection of the true solution at each t_k, with the
//                      projection-error and field-norm series filled in;
//   ExactModal         iterated one-lag modal evolution from v(0);
//   Galerkin           modal ODE integration from v(0).
Trajectory reference_trajectory(const BasisPtr& basis, const InitialCondition& u0,
                                double delta, int steps, const PdeSpec& pde, TrajKind kind,
                                const SolverConfig& scfg = {},
                                const ReferenceConfig& rcfg = {});

enum class ErrorNorm { FieldL2, CoefficientL2 };

struct ErrorSeries {
  std::vector<double> value;
  std::vector<char> reference_zero;  // flagged instead of dividing by zero
};

// Per-step |a - b| / |b|. The coefficient norm compares vectors directly; the
// field norm adds b's projection-error series (when present) to both sides,
// giving the error against the underlying true field.
ErrorSeries relative_error(const Trajectory& a, const Trajectory& b, ErrorNorm norm);

struct ProbeEstimates {
  double eps_dnn = 0.0;  // max |network(v) - one-lag evolution(v)|
  double norm_n = 0.0;   // max |network(v)| / |v|
  double norm_pe = 0.0;  // max |one-lag evolution(v)| / |v|
  int64_t probe_count = 0;
  std::string description;
};

// Probe-set estimates over `count` uniform draws from the box.
ProbeEstimates estimate_operators(const ResNet& model, const BasisPtr& basis,
                                  const PdeSpec& pde, double delta, const ModalBox& box,
                                  int64_t count, uint64_t seed,
                                  const SolverConfig& scfg = {}, bool parallel = true);

struct ErrorReport {
  std::vector<double> times;
  std::vector<double> coeff_err;       // |v~ - v^|
  std::vector<double> rel_err_coeff;   // flagged entries stored as -1
  std::vector<double> rel_err_field;
  std::vector<double> eps_proj;
  std::vector<double> bound_rhs_coeff;
  std::vector<double> bound_rhs_field;
  ProbeEstimates probes;
  bool holds = false;      // coefficient bound satisfied at every step
  double min_slack = 0.0;  // min over steps of RHS - LHS
  std::string to_json() const;
  void save_json(const std::string& path) const;
};

// Rolls the model out against the optimal-projection reference and evaluates
// the step-error bound: at every t_k the coefficient error must not exceed
//   sum_{j<k} norm_n^{k-1-j} (eps_dnn |v^(t_j)| + eps_proj(t_j) norm_pe),
// and the field error adds eps_proj(t_k) to both sides.
ErrorReport theorem_bound_check(const ResNet& model, const BasisPtr& basis,
                                const PdeSpec& pde, const ModalBox& probe_box,
                                int64_t probe_count, uint64_t probe_seed,
                                const InitialCondition& u0, double delta, int horizon,
                                const SolverConfig& scfg = {},
                                const ReferenceConfig& rcfg = {});

struct PropositionReport {
  std::vector<double> times;
  std::vector<double> lhs;  // field error of the iterated modal evolution
  std::vector<double> rhs;  // sum_{j<=k} norm_pe^{k-j} eps_proj(t_j)
  double norm_pe = 0.0;
  bool holds = false;  // lhs <= rhs + 1e-10 at every step
  double min_slack = 0.0;
};

// Bound for the exact finite-dimensional evolution (no network involved).
PropositionReport proposition_bound_check(const BasisPtr& basis, const InitialCondition& u0,
                                          double delta, int steps, const PdeSpec& pde,
                                          const ModalBox& probe_box, int64_t probe_count,
                                          uint64_t probe_seed,
                                          const SolverConfig& scfg = {},
                                          const ReferenceConfig& rcfg = {});

}  // namespace mevo
