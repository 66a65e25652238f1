#include "mevo/basis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mevo {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

}  // namespace

void PhysicalDomain::validate() const {
  if (dims != 1 && dims != 2)
    throw ConfigError("domain dims must be 1 or 2, got " + std::to_string(dims));
  for (int a = 0; a < dims; ++a)
    if (!(lo[a] < hi[a]))
      throw ConfigError("domain axis " + std::to_string(a) + " needs lo < hi, got [" +
                        std::to_string(lo[a]) + ", " + std::to_string(hi[a]) + "]");
}

PhysicalDomain interval(double lo, double hi, Boundary b) {
  PhysicalDomain d;
  d.dims = 1;
  d.lo[0] = lo;
  d.hi[0] = hi;
  d.boundary[0] = b;
  d.validate();
  return d;
}

PhysicalDomain rectangle(double lo0, double hi0, double lo1, double hi1, Boundary b0,
                         Boundary b1) {
  PhysicalDomain d;
  d.dims = 2;
  d.lo = {lo0, lo1};
  d.hi = {hi0, hi1};
  d.boundary = {b0, b1};
  d.validate();
  return d;
}

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::RealTrig: return "real-trig";
    case BasisKind::Sine: return "sine";
    case BasisKind::TensorTrig2d: return "tensor-trig-2d";
    case BasisKind::CustomOrthonormalized: return "custom-orthonormalized";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "real-trig") return BasisKind::RealTrig;
  if (s == "sine") return BasisKind::Sine;
  if (s == "tensor-trig-2d") return BasisKind::TensorTrig2d;
  if (s == "custom-orthonormalized") return BasisKind::CustomOrthonormalized;
  throw ConfigError("unknown basis kind: " + s);
}

std::size_t Quadrature::grid_size() const {
  std::size_t q = 1;
  for (const auto& ax : axes) q *= ax.nodes.size();
  return q;
}

AxisRule uniform_periodic_rule(double lo, double hi, int m) {
  if (m < 1) throw ConfigError("quadrature needs at least one node");
  AxisRule r;
  const double h = (hi - lo) / m;
  r.nodes.resize(m);
  r.weights.assign(m, h);
  for (int i = 0; i < m; ++i) r.nodes[i] = lo + h * i;
  return r;
}

AxisRule gauss_legendre_rule(double lo, double hi, int m) {
  if (m < 1) throw ConfigError("quadrature needs at least one node");
  AxisRule r;
  r.nodes.resize(m);
  r.weights.resize(m);
  // Newton on P_m with the Tricomi initial guess; converges in a few steps.
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= m; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    // map [-1,1] -> [lo,hi]; store ascending
    double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    r.nodes[i] = mid - half * x;
    r.nodes[m - 1 - i] = mid + half * x;
    r.weights[i] = r.weights[m - 1 - i] = half * w;
  }
  return r;
}

void FieldSample::validate() const {
  if (grid.rows() != values.size())
    throw ConfigError("field grid/value length mismatch: " + std::to_string(grid.rows()) +
                      " vs " + std::to_string(values.size()));
  if (!values.allFinite()) throw NumericError("field contains non-finite values");
}

void ModalVector::validate() const {
  if (!basis) throw ConfigError("modal vector has no basis");
  if (v.size() != basis->n())
    throw ConfigError("modal vector length " + std::to_string(v.size()) +
                      " does not match basis n = " + std::to_string(basis->n()));
  if (!v.allFinite()) throw NumericError("modal vector has non-finite entries");
}

void Basis::build_grid() {
  const int dims = domain_.dims;
  const auto& ax = quad_.axes;
  const std::size_t q = quad_.grid_size();
  grid_.resize(q, dims);
  weights_.resize(q);
  if (dims == 1) {
    for (std::size_t i = 0; i < q; ++i) {
      grid_(i, 0) = ax[0].nodes[i];
      weights_(i) = ax[0].weights[i];
    }
  } else {
    const std::size_t nx = ax[0].nodes.size(), ny = ax[1].nodes.size();
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t f = iy * nx + ix;
        grid_(f, 0) = ax[0].nodes[ix];
        grid_(f, 1) = ax[1].nodes[iy];
        weights_(f) = ax[0].weights[ix] * ax[1].weights[iy];
      }
  }
}

int Basis::max_wavenumber(int axis) const {
  int k = 0;
  for (const auto& m : modes_) k = std::max(k, m.k[axis]);
  for (const auto& m : raw_modes_) k = std::max(k, m.k[axis]);
  return k;
}

namespace {

// Closed-form factor evaluation. omega is the angular frequency per unit
// wavenumber on the axis (2 pi / L periodic, 1 for the sine families).
double eval_factor(Factor f, int k, double omega, double x) {
  switch (f) {
    case Factor::Constant: return 1.0;
    case Factor::Cos: return std::cos(k * omega * x);
    case Factor::Sin: return std::sin(k * omega * x);
  }
  return 0.0;
}

struct EvalContext {
  double omega[2] = {1.0, 1.0};
};

EvalContext eval_context(const PhysicalDomain& dom, BasisKind kind) {
  EvalContext c;
  for (int a = 0; a < dom.dims; ++a) {
    if (kind == BasisKind::Sine) {
      c.omega[a] = 1.0;  // sin(j x) families on (0,pi) and (-pi,pi)
    } else {
      c.omega[a] = 2.0 * kPi / dom.length(a);
    }
  }
  return c;
}

// d/dx of the factor: cos(k w x) -> -k w sin(k w x), sin -> k w cos, const -> 0.
double eval_factor_deriv(Factor f, int k, double omega, double x) {
  switch (f) {
    case Factor::Constant: return 0.0;
    case Factor::Cos: return -k * omega * std::sin(k * omega * x);
    case Factor::Sin: return k * omega * std::cos(k * omega * x);
  }
  return 0.0;
}

Eigen::MatrixXd eval_modes(const std::vector<ModeInfo>& modes, const EvalContext& ctx,
                           int dims, const Eigen::MatrixXd& pts, int deriv_axis = -1) {
  Eigen::MatrixXd out(modes.size(), pts.rows());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto& m = modes[j];
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
      double v = deriv_axis == 0
                     ? eval_factor_deriv(m.factor[0], m.k[0], ctx.omega[0], pts(p, 0))
                     : eval_factor(m.factor[0], m.k[0], ctx.omega[0], pts(p, 0));
      if (dims == 2)
        v *= deriv_axis == 1
                 ? eval_factor_deriv(m.factor[1], m.k[1], ctx.omega[1], pts(p, 1))
                 : eval_factor(m.factor[1], m.k[1], ctx.omega[1], pts(p, 1));
      out(j, p) = v;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd Basis::eval_on(const Eigen::MatrixXd& points) const {
  if (points.cols() != domain_.dims)
    throw ConfigError("evaluation points have " + std::to_string(points.cols()) +
                      " columns, domain has " + std::to_string(domain_.dims));
  if (kind_ == BasisKind::CustomOrthonormalized) {
    // Only the stored quadrature grid is available for sample-defined bases.
    if (points.rows() == grid_.rows() && points.isApprox(grid_, 1e-12)) return values_;
    throw ConfigError("custom-orthonormalized basis can only be evaluated on its "
                      "quadrature grid");
  }
  const EvalContext ctx = eval_context(domain_, kind_);
  if (!coef_.size()) {
    Eigen::MatrixXd raw = eval_modes(modes_, ctx, domain_.dims, points);
    return norms_.asDiagonal() * raw;
  }
  Eigen::MatrixXd raw = eval_modes(raw_modes_, ctx, domain_.dims, points);
  return coef_ * raw;
}

Eigen::MatrixXd Basis::eval_deriv_on(const Eigen::MatrixXd& points, int axis) const {
  if (points.cols() != domain_.dims)
    throw ConfigError("evaluation points have " + std::to_string(points.cols()) +
                      " columns, domain has " + std::to_string(domain_.dims));
  if (axis < 0 || axis >= domain_.dims)
    throw ConfigError("derivative axis out of range");
  if (kind_ == BasisKind::CustomOrthonormalized)
    throw ConfigError("custom-orthonormalized bases have no closed-form derivative");
  const EvalContext ctx = eval_context(domain_, kind_);
  if (!coef_.size())
    return norms_.asDiagonal() * eval_modes(modes_, ctx, domain_.dims, points, axis);
  return coef_ * eval_modes(raw_modes_, ctx, domain_.dims, points, axis);
}

Eigen::MatrixXd Basis::gram() const {
  return values_ * weights_.asDiagonal() * values_.transpose();
}

namespace {

// Shared Gram-Schmidt core: returns the coefficient matrix T with
// orthonormal rows T * raw under the weights. Throws on rank deficiency.
Eigen::MatrixXd mgs_coefficients(const Eigen::MatrixXd& raw, const Eigen::VectorXd& w) {
  const Eigen::Index m = raw.rows();
  Eigen::MatrixXd out = raw;  // working copies of the vectors
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c = (out.row(j).array() * w.transpose().array() * out.row(i).array()).sum();
      out.row(i) -= c * out.row(j);
      T.row(i) -= c * T.row(j);
    }
    const double nrm =
        std::sqrt((out.row(i).array().square() * w.transpose().array()).sum());
    if (!(nrm >= 1e-12))
      throw ConfigError("orthonormalize: rank deficiency at raw function index " +
                        std::to_string(i) + " (pivot norm " + std::to_string(nrm) + ")");
    out.row(i) /= nrm;
    T.row(i) /= nrm;
  }
  return T;
}

std::string factor_label(Factor f, int k, const char* var) {
  char buf[32];
  switch (f) {
    case Factor::Constant: return "1";
    case Factor::Cos:
      if (k == 1)
        std::snprintf(buf, sizeof(buf), "cos(%s)", var);
      else
        std::snprintf(buf, sizeof(buf), "cos(%d%s)", k, var);
      return buf;
    case Factor::Sin:
      if (k == 1)
        std::snprintf(buf, sizeof(buf), "sin(%s)", var);
      else
        std::snprintf(buf, sizeof(buf), "sin(%d%s)", k, var);
      return buf;
  }
  return "?";
}

}  // namespace

BasisPtr make_basis(const PhysicalDomain& dom, BasisKind kind, int n_or_max_wavenumber) {
  dom.validate();
  auto basis = std::shared_ptr<Basis>(new Basis());
  Basis& b = *basis;
  b.domain_ = dom;
  b.kind_ = kind;

  switch (kind) {
    case BasisKind::RealTrig: {
      if (dom.dims != 1) throw ConfigError("real-trig basis is one-dimensional");
      if (dom.boundary[0] != Boundary::Periodic)
        throw ConfigError("real-trig basis requires a periodic domain");
      const int kmax = n_or_max_wavenumber;
      if (kmax < 0) throw ConfigError("real-trig max wavenumber must be >= 0");
      b.n_ = 2 * kmax + 1;
      if (b.n_ < 1) throw ConfigError("basis dimension must be >= 1");
      const double len = dom.length(0);
      b.modes_.push_back({});
      b.labels_.push_back("1");
      for (int k = 1; k <= kmax; ++k) {
        b.modes_.push_back({{k, 0}, {Factor::Cos, Factor::Constant}});
        b.labels_.push_back(factor_label(Factor::Cos, k, "x"));
        b.modes_.push_back({{k, 0}, {Factor::Sin, Factor::Constant}});
        b.labels_.push_back(factor_label(Factor::Sin, k, "x"));
      }
      b.norms_.resize(b.n_);
      b.norms_(0) = 1.0 / std::sqrt(len);
      for (int j = 1; j < b.n_; ++j) b.norms_(j) = std::sqrt(2.0 / len);
      const int m = std::max(4 * kmax + 1, 64);
      b.quad_.axes.push_back(uniform_periodic_rule(dom.lo[0], dom.hi[0], m));
      break;
    }
    case BasisKind::Sine: {
      if (dom.dims != 1) throw ConfigError("sine basis is one-dimensional");
      if (dom.boundary[0] != Boundary::HomogeneousDirichlet)
        throw ConfigError("sine basis requires a homogeneous-dirichlet domain");
      const bool zero_pi = close(dom.lo[0], 0.0) && close(dom.hi[0], kPi);
      const bool sym_pi = close(dom.lo[0], -kPi) && close(dom.hi[0], kPi);
      if (!zero_pi && !sym_pi)
        throw ConfigError("sine basis supports the domains (0,pi) and (-pi,pi)");
      const int n = n_or_max_wavenumber;
      if (n < 1) throw ConfigError("basis dimension must be >= 1");
      b.n_ = n;
      const double nrm = zero_pi ? std::sqrt(2.0 / kPi) : 1.0 / std::sqrt(kPi);
      b.norms_ = Eigen::VectorXd::Constant(n, nrm);
      for (int j = 1; j <= n; ++j) {
        b.modes_.push_back({{j, 0}, {Factor::Sin, Factor::Constant}});
        b.labels_.push_back(factor_label(Factor::Sin, j, "x"));
      }
      const double len = dom.length(0);
      const int m = std::max(4 * n + 1, int(std::ceil(2.5 * n * len / kPi)) + 12);
      b.quad_.axes.push_back(gauss_legendre_rule(dom.lo[0], dom.hi[0], m));
      break;
    }
    case BasisKind::TensorTrig2d: {
      if (dom.dims != 2) throw ConfigError("tensor-trig-2d basis is two-dimensional");
      if (dom.boundary[0] != Boundary::Periodic || dom.boundary[1] != Boundary::Periodic)
        throw ConfigError("tensor-trig-2d basis requires periodic axes");
      if (n_or_max_wavenumber != 0 && n_or_max_wavenumber != 25)
        throw ConfigError("tensor-trig-2d basis has exactly 25 functions");
      b.n_ = 25;
      // The 25 raw products: constant; single-axis cos/sin up to wavenumber 3;
      // the four products for the (1,1), (1,2), (2,1) shells.
      auto add = [&](Factor fx, int kx, Factor fy, int ky) {
        b.raw_modes_.push_back({{kx, ky}, {fx, fy}});
        std::string lx = factor_label(fx, kx, "x"), ly = factor_label(fy, ky, "y");
        if (lx == "1" && ly == "1")
          b.labels_.push_back("1");
        else if (ly == "1")
          b.labels_.push_back(lx);
        else if (lx == "1")
          b.labels_.push_back(ly);
        else
          b.labels_.push_back(lx + ly);
      };
      add(Factor::Constant, 0, Factor::Constant, 0);
      for (int k = 1; k <= 3; ++k) {
        add(Factor::Cos, k, Factor::Constant, 0);
        add(Factor::Sin, k, Factor::Constant, 0);
      }
      for (int k = 1; k <= 3; ++k) {
        add(Factor::Constant, 0, Factor::Cos, k);
        add(Factor::Constant, 0, Factor::Sin, k);
      }
      for (auto [p, q] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
        add(Factor::Cos, p, Factor::Cos, q);
        add(Factor::Cos, p, Factor::Sin, q);
        add(Factor::Sin, p, Factor::Cos, q);
        add(Factor::Sin, p, Factor::Sin, q);
      }
      for (int a = 0; a < 2; ++a) {
        const int m = std::max(4 * 3 + 1, 64);
        b.quad_.axes.push_back(uniform_periodic_rule(dom.lo[a], dom.hi[a], m));
      }
      break;
    }
    case BasisKind::CustomOrthonormalized:
      throw ConfigError("custom-orthonormalized bases are built via orthonormalize()");
  }

  b.build_grid();
  if (b.raw_modes_.empty()) {
    const EvalContext ctx = eval_context(dom, kind);
    b.values_ = b.norms_.asDiagonal() * eval_modes(b.modes_, ctx, dom.dims, b.grid_);
  } else {
    // Orthonormalize the raw products once at construction. They are already
    // orthogonal under the exact-for-trig quadrature, so the coefficient
    // matrix is numerically diagonal, but we run the full procedure anyway.
    const EvalContext ctx = eval_context(dom, kind);
    Eigen::MatrixXd raw = eval_modes(b.raw_modes_, ctx, dom.dims, b.grid_);
    b.coef_ = mgs_coefficients(raw, b.weights_);
    b.values_ = b.coef_ * raw;
    b.modes_ = b.raw_modes_;  // diagonal coefficients preserve mode structure
  }
  return basis;
}

BasisPtr orthonormalize(const PhysicalDomain& dom, const Quadrature& quad,
                        const Eigen::MatrixXd& raw, const std::vector<std::string>& labels) {
  dom.validate();
  if (int(quad.axes.size()) != dom.dims)
    throw ConfigError("quadrature axis count does not match domain dims");
  if (raw.cols() != Eigen::Index(quad.grid_size()))
    throw ConfigError("raw function samples must match the quadrature grid size");
  if (raw.rows() < 1) throw ConfigError("orthonormalize needs at least one raw function");
  if (!labels.empty() && Eigen::Index(labels.size()) != raw.rows())
    throw ConfigError("label count does not match raw function count");

  auto basis = std::shared_ptr<Basis>(new Basis());
  Basis& b = *basis;
  b.kind_ = BasisKind::CustomOrthonormalized;
  b.domain_ = dom;
  b.quad_ = quad;
  b.n_ = int(raw.rows());
  b.build_grid();
  Eigen::MatrixXd T = mgs_coefficients(raw, b.weights_);
  b.values_ = T * raw;
  for (int j = 0; j < b.n_; ++j)
    b.labels_.push_back(labels.empty() ? "custom_" + std::to_string(j + 1) : labels[j]);
  return basis;
}

FieldSample lift(const ModalVector& mv) {
  mv.validate();
  FieldSample f;
  f.grid = mv.basis->grid();
  f.values = mv.basis->values().transpose() * mv.v;
  return f;
}

FieldSample lift(const ModalVector& mv, const Eigen::MatrixXd& grid) {
  mv.validate();
  FieldSample f;
  f.grid = grid;
  f.values = mv.basis->eval_on(grid).transpose() * mv.v;
  return f;
}

namespace {

void check_on_quadrature_grid(const FieldSample& field, const Basis& basis) {
  const auto& g = basis.grid();
  if (field.grid.rows() != g.rows() || field.grid.cols() != g.cols())
    throw ConfigError("field grid size " + std::to_string(field.grid.rows()) +
                      " does not match the basis quadrature grid size " +
                      std::to_string(g.rows()));
  if (!field.grid.isApprox(g, 1e-12))
    throw ConfigError("field grid does not coincide with the basis quadrature nodes");
}

}  // namespace

ModalVector project(const FieldSample& field, const BasisPtr& basis) {
  field.validate();
  check_on_quadrature_grid(field, *basis);
  ModalVector mv;
  mv.basis = basis;
  mv.v = basis->values() * (basis->weights().cwiseProduct(field.values));
  return mv;
}

double projection_error(const FieldSample& field, const BasisPtr& basis) {
  field.validate();
  check_on_quadrature_grid(field, *basis);
  ModalVector mv = project(field, basis);
  Eigen::VectorXd resid = field.values - basis->values().transpose() * mv.v;
  return std::sqrt(resid.cwiseProduct(resid).dot(basis->weights()));
}

double field_norm(const FieldSample& field, const Basis& basis) {
  check_on_quadrature_grid(field, basis);
  return std::sqrt(field.values.cwiseProduct(field.values).dot(basis.weights()));
}

Eigen::VectorXd project_weighted(const Basis& basis, const Eigen::MatrixXd& grid,
                                 const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& values) {
  if (grid.rows() != weights.size() || grid.rows() != values.size())
    throw ConfigError("project_weighted: grid/weights/values length mismatch");
  return basis.eval_on(grid) * weights.cwiseProduct(values);
}

void save_field_csv(const std::string& path, const FieldSample& field) {
  field.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write field CSV: " + path);
  const bool two_d = field.grid.cols() == 2;
  out << (two_d ? "x,y,u\n" : "x,u\n");
  char buf[96];
  for (Eigen::Index i = 0; i < field.grid.rows(); ++i) {
    if (two_d)
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", field.grid(i, 0),
                    field.grid(i, 1), field.values(i));
    else
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", field.grid(i, 0), field.values(i));
    out << buf;
  }
}

FieldSample load_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open field CSV: " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty field CSV: " + path);
  int cols;
  if (header == "x,u")
    cols = 2;
  else if (header == "x,y,u")
    cols = 3;
  else
    throw FormatError("field CSV header must be \"x,u\" or \"x,y,u\", got \"" + header +
                      "\" in " + path);
  std::vector<std::array<double, 3>> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 3> r{0, 0, 0};
    std::istringstream ss(line);
    std::string cell;
    for (int c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ','))
        throw FormatError("short row at " + path + ":" + std::to_string(lineno));
      try {
        r[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("bad number '" + cell + "' at " + path + ":" +
                          std::to_string(lineno));
      }
    }
    rows.push_back(r);
  }
  FieldSample f;
  f.grid.resize(rows.size(), cols - 1);
  f.values.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    f.grid(i, 0) = rows[i][0];
    if (cols == 3) f.grid(i, 1) = rows[i][1];
    f.values(i) = rows[i][cols - 1];
  }
  f.validate();
  return f;
}

std::string Basis::to_json_string() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["domain"]["dims"] = domain_.dims;
  for (int a = 0; a < domain_.dims; ++a) {
    j["domain"]["lo"].push_back(domain_.lo[a]);
    j["domain"]["hi"].push_back(domain_.hi[a]);
    j["domain"]["boundary"].push_back(
        domain_.boundary[a] == Boundary::Periodic ? "periodic" : "homogeneous-dirichlet");
  }
  j["n"] = n_;
  j["labels"] = labels_;
  for (const auto& ax : quad_.axes) {
    nlohmann::json a;
    a["nodes"] = ax.nodes;
    a["weights"] = ax.weights;
    j["quadrature"]["axes"].push_back(a);
  }
  return j.dump(2);
}

void Basis::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write basis JSON: " + path);
  out << to_json_string() << "\n";
}

BasisPtr Basis::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("basis JSON parse error: ") + e.what());
  }
  try {
    BasisKind kind = basis_kind_from_string(j.at("kind").get<std::string>());
    if (kind == BasisKind::CustomOrthonormalized)
      throw ConfigError("custom-orthonormalized bases cannot be rebuilt from JSON "
                        "(raw function samples are not serialized)");
    PhysicalDomain dom;
    dom.dims = j.at("domain").at("dims").get<int>();
    for (int a = 0; a < dom.dims; ++a) {
      dom.lo[a] = j.at("domain").at("lo").at(a).get<double>();
      dom.hi[a] = j.at("domain").at("hi").at(a).get<double>();
      std::string bnd = j.at("domain").at("boundary").at(a).get<std::string>();
      if (bnd == "periodic")
        dom.boundary[a] = Boundary::Periodic;
      else if (bnd == "homogeneous-dirichlet")
        dom.boundary[a] = Boundary::HomogeneousDirichlet;
      else
        throw ConfigError("unknown boundary kind: " + bnd);
    }
    const int n = j.at("n").get<int>();
    int arg = n;
    if (kind == BasisKind::RealTrig) {
      if (n % 2 == 0) throw ConfigError("real-trig basis dimension must be odd");
      arg = (n - 1) / 2;
    }
    return make_basis(dom, kind, arg);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("basis JSON missing or mistyped field: ") + e.what());
  }
}

BasisPtr Basis::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open basis JSON: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

}  // namespace mevo
