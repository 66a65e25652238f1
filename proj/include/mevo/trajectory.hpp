#pragma once

// Time series of modal coefficient vectors at a fixed lag, with CSV io.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mevo/basis.hpp"

namespace mevo {

enum class TrajKind {
  Predicted,          // recursive network rollout
  OptimalProjection,  // projection of the reference solution at each step
  Galerkin,           // modal ODE integration
  ExactModal,         // closed-form propagator applied in modal space
};

std::string to_string(TrajKind k);

struct Trajectory {
  TrajKind kind = TrajKind::Predicted;
  BasisPtr basis;
  double delta = 0.0;           // time lag between consecutive entries
  std::vector<Eigen::VectorXd> v;  // v[k] = coefficients at t = k * delta

  // Optional per-step extras, populated for reference trajectories where the
  // underlying field is known: projection error and full-field norm at each step.
  std::vector<double> eps_proj;
  std::vector<double> field_norms;

  int steps() const { return int(v.size()) - 1; }
  double time(int k) const { return delta * k; }
  void validate() const;
};

// CSV layout: header "t,v_1,...,v_n", one row per step, 17 significant digits.
void save_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory_csv(const std::string& path, const BasisPtr& basis);

}  // namespace mevo
