#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mevo/errors.hpp"

namespace mevo {

enum class Boundary { Periodic, HomogeneousDirichlet };

// 1D interval or 2D rectangle with a boundary kind per axis.
struct PhysicalDomain {
  int dims = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
  std::array<Boundary, 2> boundary{Boundary::Periodic, Boundary::Periodic};

  double length(int axis) const { return hi[axis] - lo[axis]; }
  void validate() const;  // throws ConfigError on lo >= hi or dims not in {1,2}
};

PhysicalDomain interval(double lo, double hi, Boundary b);
PhysicalDomain rectangle(double lo0, double hi0, double lo1, double hi1,
                         Boundary b0 = Boundary::Periodic, Boundary b1 = Boundary::Periodic);

enum class BasisKind { RealTrig, Sine, TensorTrig2d, CustomOrthonormalized };

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

// Per-axis factor of a basis function.
enum class Factor { Constant, Cos, Sin };

// Wavenumber structure of one basis function; drives the exact propagators.
struct ModeInfo {
  std::array<int, 2> k{0, 0};
  std::array<Factor, 2> factor{Factor::Constant, Factor::Constant};
};

// One quadrature rule per axis. The flattened grid is the tensor product with
// x varying fastest: flat index q = iy * nx + ix.
struct AxisRule {
  std::vector<double> nodes, weights;
};

struct Quadrature {
  std::vector<AxisRule> axes;
  std::size_t grid_size() const;
};

// Uniform nodes with weight L/m (composite trapezoid on a full period).
AxisRule uniform_periodic_rule(double lo, double hi, int m);
// Gauss-Legendre on [lo, hi].
AxisRule gauss_legendre_rule(double lo, double hi, int m);

struct FieldSample {
  Eigen::MatrixXd grid;    // Q x dims node coordinates
  Eigen::VectorXd values;  // Q
  void validate() const;   // matching lengths, finite values
};

class Basis;
using BasisPtr = std::shared_ptr<const Basis>;

struct ModalVector {
  BasisPtr basis;
  Eigen::VectorXd v;
  void validate() const;  // length matches basis n, finite entries
};

class Basis {
 public:
  BasisKind kind() const { return kind_; }
  const PhysicalDomain& domain() const { return domain_; }
  int n() const { return n_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Quadrature& quadrature() const { return quad_; }
  // Empty for custom-orthonormalized bases built from raw samples.
  const std::vector<ModeInfo>& modes() const { return modes_; }
  int max_wavenumber(int axis) const;

  const Eigen::MatrixXd& grid() const { return grid_; }       // Q x dims
  const Eigen::VectorXd& weights() const { return weights_; } // Q
  const Eigen::MatrixXd& values() const { return values_; }   // n x Q on the grid

  // Basis function values at arbitrary points (P x dims). Throws ConfigError
  // for custom bases when the points are not the quadrature grid.
  Eigen::MatrixXd eval_on(const Eigen::MatrixXd& points) const;

  // Partial derivative along the given axis at arbitrary points. Closed-form
  // bases only; custom bases throw ConfigError.
  Eigen::MatrixXd eval_deriv_on(const Eigen::MatrixXd& points, int axis) const;

  Eigen::MatrixXd gram() const;  // via the stored quadrature

  std::string to_json_string() const;
  void save_json(const std::string& path) const;
  static BasisPtr from_json_string(const std::string& text);
  static BasisPtr load_json(const std::string& path);

 private:
  friend BasisPtr make_basis(const PhysicalDomain&, BasisKind, int);
  friend BasisPtr orthonormalize(const PhysicalDomain&, const Quadrature&,
                                 const Eigen::MatrixXd&, const std::vector<std::string>&);
  Basis() = default;
  void build_grid();  // flattens quad_ into grid_/weights_

  BasisKind kind_ = BasisKind::CustomOrthonormalized;
  PhysicalDomain domain_;
  int n_ = 0;
  std::vector<std::string> labels_;
  Quadrature quad_;
  std::vector<ModeInfo> modes_;
  Eigen::MatrixXd grid_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd values_;
  // Closed-form bases: values anywhere come from modes_ and norms_.
  // Tensor 2D: Gram-Schmidt coefficients over the raw products (coef_ * raw).
  Eigen::VectorXd norms_;    // per-function normalization constant
  Eigen::MatrixXd coef_;     // n x m_raw, empty unless tensor-2d/custom
  std::vector<ModeInfo> raw_modes_;
};

// For real-trig, the third argument is the max wavenumber (n = 2k+1);
// for sine it is n itself; for tensor-trig-2d it must be 25 (or 0 = default).
BasisPtr make_basis(const PhysicalDomain& dom, BasisKind kind, int n_or_max_wavenumber);

// Modified Gram-Schmidt in the quadrature inner product. raw is m x Q values
// of the raw functions on the quadrature grid. Throws ConfigError with the
// offending index when a pivot norm falls below 1e-12.
BasisPtr orthonormalize(const PhysicalDomain& dom, const Quadrature& quad,
                        const Eigen::MatrixXd& raw,
                        const std::vector<std::string>& labels = {});

// u_n = sum v_j phi_j on the basis quadrature grid, or a caller grid.
FieldSample lift(const ModalVector& mv);
FieldSample lift(const ModalVector& mv, const Eigen::MatrixXd& grid);

// v_j = <u, phi_j> via the basis quadrature. The field must be sampled on the
// quadrature grid (checked, ConfigError on mismatch).
ModalVector project(const FieldSample& field, const BasisPtr& basis);

// ||u - P_n u||_V via the basis quadrature.
double projection_error(const FieldSample& field, const BasisPtr& basis);

// Quadrature V-norm of a field given on the basis quadrature grid.
double field_norm(const FieldSample& field, const Basis& basis);

// Projection from a caller-supplied quadrature (grid P x dims, weights P).
// Used by the fine-grid solver path; exact when the rule integrates products
// of the field's band with the basis functions.
Eigen::VectorXd project_weighted(const Basis& basis, const Eigen::MatrixXd& grid,
                                 const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& values);

// FieldSample I/O: CSV with header "x,u" (1D) or "x,y,u" (2D), 17 significant
// digits so round trips are exact.
void save_field_csv(const std::string& path, const FieldSample& field);
FieldSample load_field_csv(const std::string& path);

}  // namespace mevo
