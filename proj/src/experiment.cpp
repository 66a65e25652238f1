#include "mevo/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mevo/errors.hpp"
#include "mevo/sha256.hpp"
#include "mevo/trajectory.hpp"

namespace mevo {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kDatasetFile = "dataset.mevd";
const char* const kBasisFile = "basis.json";
const char* const kModelFile = "model.mevm";
const char* const kLossFile = "loss_history.csv";
const char* const kPredictedFile = "predicted.csv";
const char* const kOptimalFile = "optimal.csv";
const char* const kGalerkinFile = "galerkin.csv";
const char* const kErrorReportFile = "error_report.json";
const char* const kManifestFile = "manifest.json";

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Drop nlohmann's "[json.exception...]" prefix; keep its line/column info.
std::string clean_json_error(const char* what) {
  std::string s = what;
  const auto pos = s.find("] ");
  return pos == std::string::npos ? s : s.substr(pos + 2);
}

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + clean_json_error(e.what()));
  }
}

// View of one configuration object that names the source file and the dotted
// path in every error.
struct Section {
  const json* j;  // null for an absent optional section
  std::string path;
  std::string source;

  bool present() const { return j != nullptr; }
  std::string at(const char* key) const {
    return path.empty() ? std::string(key) : path + "." + key;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source + ": " + msg);
  }

  const json* find(const char* key) const {
    if (!present()) return nullptr;
    const auto it = j->find(key);
    return it == j->end() ? nullptr : &*it;
  }

  Section sub(const char* key, bool required) const {
    const json* v = find(key);
    if (!v) {
      if (required) fail(at(key) + " section is missing");
      return {nullptr, at(key), source};
    }
    if (!v->is_object()) fail(at(key) + " must be an object");
    return {v, at(key), source};
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (!present()) return;
    for (auto it = j->begin(); it != j->end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known)
        fail("unknown key '" + it.key() + "' in " + (path.empty() ? "the top level" : path));
    }
  }

  double num(const char* key, double dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(at(key) + " must be a number");
    return v->get<double>();
  }
  double num_req(const char* key) const {
    if (!find(key)) fail(at(key) + " is required");
    return num(key, 0.0);
  }
  int64_t integer(const char* key, int64_t dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_number_integer()) fail(at(key) + " must be an integer");
    return v->get<int64_t>();
  }
  int64_t integer_req(const char* key) const {
    if (!find(key)) fail(at(key) + " is required");
    return integer(key, 0);
  }
  uint64_t uinteger(const char* key, uint64_t dflt) const {
    const int64_t v = integer(key, int64_t(dflt));
    if (v < 0) fail(at(key) + " must be >= 0");
    return uint64_t(v);
  }
  bool flag(const char* key, bool dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(at(key) + " must be true or false");
    return v->get<bool>();
  }
  std::string str(const char* key, const std::string& dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_string()) fail(at(key) + " must be a string");
    return v->get<std::string>();
  }
  std::string str_req(const char* key) const {
    if (!find(key)) fail(at(key) + " is required");
    return str(key, "");
  }
};

// Interval endpoints may be spelled symbolically so presets stay readable.
double endpoint_value(const json& v, const Section& sec, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "0") return 0.0;
    if (s == "pi") return kPi;
    if (s == "-pi") return -kPi;
    if (s == "2pi") return 2 * kPi;
    if (s == "-2pi") return -2 * kPi;
    if (s == "pi/2") return kPi / 2;
    if (s == "-pi/2") return -kPi / 2;
    sec.fail(where + ": unknown symbolic value '" + s +
             "' (use a number or one of 0, pi, -pi, 2pi, -2pi, pi/2, -pi/2)");
  }
  sec.fail(where + " must be a number or a symbolic string");
}

// Scalar or per-axis array of endpoints.
std::vector<double> endpoint_list(const Section& sec, const char* key) {
  const json* v = sec.find(key);
  if (!v) sec.fail(sec.at(key) + " is required");
  std::vector<double> out;
  if (v->is_array()) {
    int i = 0;
    for (const auto& e : *v)
      out.push_back(endpoint_value(e, sec, sec.at(key) + "." + std::to_string(i++)));
  } else {
    out.push_back(endpoint_value(*v, sec, sec.at(key)));
  }
  if (out.empty() || out.size() > 2) sec.fail(sec.at(key) + " needs one or two entries");
  return out;
}

BasisPtr parse_basis(const Section& sec) {
  sec.allow({"kind", "n", "domain"});
  BasisKind kind;
  try {
    kind = basis_kind_from_string(sec.str_req("kind"));
  } catch (const ConfigError& e) {
    sec.fail(sec.at("kind") + ": " + e.what());
  }
  const int n = int(sec.integer_req("n"));

  const Section d = sec.sub("domain", true);
  d.allow({"lo", "hi", "boundary"});
  const std::vector<double> lo = endpoint_list(d, "lo");
  const std::vector<double> hi = endpoint_list(d, "hi");
  if (lo.size() != hi.size()) d.fail(d.path + ": lo and hi must have the same shape");
  const std::string bnd = d.str("boundary", "periodic");
  Boundary boundary;
  if (bnd == "periodic")
    boundary = Boundary::Periodic;
  else if (bnd == "dirichlet" || bnd == "homogeneous-dirichlet")
    boundary = Boundary::HomogeneousDirichlet;
  else
    d.fail(d.at("boundary") + ": expected periodic or dirichlet, got '" + bnd + "'");

  PhysicalDomain dom;
  dom.dims = int(lo.size());
  for (int a = 0; a < dom.dims; ++a) {
    dom.lo[a] = lo[a];
    dom.hi[a] = hi[a];
    dom.boundary[a] = boundary;
  }

  int arg = n;
  if (kind == BasisKind::RealTrig) {
    if (n % 2 != 1) sec.fail(sec.at("n") + " must be odd for real-trig (constant + pairs)");
    arg = (n - 1) / 2;
  }
  try {
    return make_basis(dom, kind, arg);
  } catch (const ConfigError& e) {
    sec.fail(sec.path + ": " + e.what());
  }
}

// alpha / sigma accept a scalar (axis 0) or a per-axis array.
std::array<double, 2> axis_pair(const Section& sec, const char* key) {
  std::array<double, 2> out{0.0, 0.0};
  const json* v = sec.find(key);
  if (!v) return out;
  if (v->is_number()) {
    out[0] = v->get<double>();
    return out;
  }
  if (!v->is_array() || v->empty() || v->size() > 2)
    sec.fail(sec.at(key) + " must be a number or an array of one or two numbers");
  int i = 0;
  for (const auto& e : *v) {
    if (!e.is_number()) sec.fail(sec.at(key) + " entries must be numbers");
    out[std::size_t(i++)] = e.get<double>();
  }
  return out;
}

PdeSpec parse_pde(const Section& sec) {
  sec.allow({"kind", "alpha", "sigma"});
  PdeSpec pde;
  try {
    pde.kind = pde_kind_from_string(sec.str_req("kind"));
  } catch (const ConfigError& e) {
    sec.fail(sec.at("kind") + ": " + e.what());
  }
  pde.alpha = axis_pair(sec, "alpha");
  pde.sigma = axis_pair(sec, "sigma");
  if (pde.sigma[0] < 0 || pde.sigma[1] < 0) sec.fail(sec.at("sigma") + " must be >= 0");
  if (pde.kind == PdeKind::ViscousBurgers && !(pde.sigma[0] > 0))
    sec.fail(sec.at("sigma") + " must be positive for the viscous equation");
  if (pde.kind == PdeKind::InviscidBurgers && (pde.sigma[0] != 0 || pde.sigma[1] != 0))
    sec.fail(sec.at("sigma") + " must be absent or zero for the inviscid equation");
  return pde;
}

SolverConfig parse_solver(const Section& sec) {
  SolverConfig cfg;
  if (!sec.present()) return cfg;
  sec.allow({"grid", "dt", "cfl", "galerkin_substeps"});
  cfg.grid = int(sec.integer("grid", cfg.grid));
  cfg.dt = sec.num("dt", cfg.dt);
  cfg.cfl = sec.num("cfl", cfg.cfl);
  cfg.galerkin_substeps = int(sec.integer("galerkin_substeps", cfg.galerkin_substeps));
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    sec.fail(sec.path + ": " + e.what());
  }
  return cfg;
}

DatasetSection parse_dataset(const Section& sec) {
  sec.allow({"delta", "count", "seed", "eta", "noise_seed", "box"});
  DatasetSection ds;
  ds.delta = sec.num_req("delta");
  if (!(ds.delta > 0)) sec.fail(sec.at("delta") + " must be positive");
  ds.count = sec.integer_req("count");
  if (ds.count < 1) sec.fail(sec.at("count") + " must be >= 1");
  ds.seed = sec.uinteger("seed", ds.seed);
  ds.eta = sec.num("eta", 0.0);
  if (ds.eta < 0 || ds.eta >= 1) sec.fail(sec.at("eta") + " must be in [0, 1)");
  ds.noise_seed = sec.uinteger("noise_seed", ds.noise_seed);

  const Section box = sec.sub("box", true);
  box.allow({"units", "bounds"});
  const std::string units = box.str("units", "coefficient");
  if (units == "wavenumber")
    ds.units = BoxUnits::Wavenumber;
  else if (units == "coefficient")
    ds.units = BoxUnits::Coefficient;
  else
    box.fail(box.at("units") + ": expected wavenumber or coefficient, got '" + units + "'");
  const json* b = box.find("bounds");
  if (!b) box.fail(box.at("bounds") + " is required");
  if (!b->is_array() || b->empty()) box.fail(box.at("bounds") + " must be a non-empty array");
  for (const auto& e : *b) {
    if (!e.is_number()) box.fail(box.at("bounds") + " entries must be numbers");
    const double val = e.get<double>();
    if (!(val >= 0)) box.fail(box.at("bounds") + " entries must be >= 0");
    ds.bounds.push_back(val);
  }
  return ds;
}

ResNetConfig parse_network(const Section& sec, int n) {
  sec.allow({"blocks", "depth", "width", "activation", "seed", "init_scale"});
  ResNetConfig net;
  net.n = n;
  net.blocks = int(sec.integer_req("blocks"));
  net.depth = int(sec.integer("depth", net.depth));
  net.width = int(sec.integer("width", net.width));
  try {
    net.activation = activation_from_string(sec.str("activation", "tanh"));
  } catch (const ConfigError& e) {
    sec.fail(sec.at("activation") + ": " + e.what());
  }
  net.seed = sec.uinteger("seed", net.seed);
  net.init_scale = sec.num("init_scale", net.init_scale);
  try {
    net.validate();
  } catch (const ConfigError& e) {
    sec.fail(sec.path + ": " + e.what());
  }
  return net;
}

TrainConfig parse_training(const Section& sec, int64_t dataset_size) {
  sec.allow({"epochs", "batch", "lr", "optimizer", "beta1", "beta2", "eps", "shuffle_seed",
             "validation_fraction", "checkpoint_every", "checkpoint_path"});
  TrainConfig tc;
  tc.epochs = int(sec.integer_req("epochs"));
  tc.batch = int(sec.integer("batch", tc.batch));
  tc.lr = sec.num("lr", tc.lr);
  try {
    tc.optimizer = optimizer_from_string(sec.str("optimizer", "adam"));
  } catch (const ConfigError& e) {
    sec.fail(sec.at("optimizer") + ": " + e.what());
  }
  tc.beta1 = sec.num("beta1", tc.beta1);
  tc.beta2 = sec.num("beta2", tc.beta2);
  tc.eps = sec.num("eps", tc.eps);
  tc.shuffle_seed = sec.uinteger("shuffle_seed", tc.shuffle_seed);
  tc.validation_fraction = sec.num("validation_fraction", tc.validation_fraction);
  tc.checkpoint_every = int(sec.integer("checkpoint_every", tc.checkpoint_every));
  tc.checkpoint_path = sec.str("checkpoint_path", tc.checkpoint_path);
  try {
    tc.validate(dataset_size);
  } catch (const ConfigError& e) {
    sec.fail(sec.path + ": " + e.what());
  }
  return tc;
}

PredictionSection parse_prediction(const Section& sec) {
  PredictionSection p;
  if (!sec.present()) return p;
  sec.allow({"ic", "horizon_steps", "probe_count", "probe_seed", "galerkin", "reference"});
  p.ic = sec.str("ic", "");
  p.horizon_steps = int(sec.integer("horizon_steps", p.horizon_steps));
  p.probe_count = sec.integer("probe_count", p.probe_count);
  if (p.probe_count < 1) sec.fail(sec.at("probe_count") + " must be >= 1");
  p.probe_seed = sec.uinteger("probe_seed", p.probe_seed);
  p.galerkin = sec.flag("galerkin", p.galerkin);
  const Section r = sec.sub("reference", false);
  if (r.present()) {
    r.allow({"grid_1d", "sine_modes", "grid_2d", "fv_grid"});
    p.reference.grid_1d = int(r.integer("grid_1d", p.reference.grid_1d));
    p.reference.sine_modes = int(r.integer("sine_modes", p.reference.sine_modes));
    p.reference.grid_2d = int(r.integer("grid_2d", p.reference.grid_2d));
    p.reference.fv_grid = int(r.integer("fv_grid", p.reference.fv_grid));
    try {
      p.reference.validate();
    } catch (const ConfigError& e) {
      r.fail(r.path + ": " + e.what());
    }
  }
  if (!p.ic.empty() && p.horizon_steps < 1)
    sec.fail(sec.at("horizon_steps") + " must be >= 1 when a start field is set");
  return p;
}

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

const std::string& preset_text(const std::string& name, const std::string& scale) {
  const auto& presets = embedded_presets();
  const std::string key = name + "." + scale;
  const auto it = presets.find(key);
  if (it != presets.end()) return it->second;
  std::string msg = "unknown preset '" + key + "'; available:";
  for (const auto& [k, text] : presets) msg += "\n  " + k;
  throw ConfigError(msg);
}

std::vector<std::string> initial_condition_ids() {
  return {"half-exp-sin", "quartic-dirichlet", "neg-sin", "exp-sin-cos-2d"};
}

InitialCondition make_initial_condition(const std::string& id) {
  InitialCondition ic;
  ic.id = id;
  if (id == "half-exp-sin") {
    ic.eval = [](double x, double) { return 0.5 * std::exp(std::sin(x)); };
  } else if (id == "quartic-dirichlet") {
    ic.eval = [](double x, double) {
      const double s = x / kPi;
      return s * (5.0 - 4.0 * s - 7.0 * s * s + 6.0 * s * s * s);
    };
  } else if (id == "neg-sin") {
    ic.eval = [](double x, double) { return -std::sin(x); };
  } else if (id == "exp-sin-cos-2d") {
    ic.dims = 2;
    ic.eval = [](double x, double y) {
      return 0.4 * std::exp(0.5 * (std::sin(x) - std::cos(y)));
    };
  } else {
    std::string msg = "unknown start field '" + id + "'; available:";
    for (const auto& s : initial_condition_ids()) msg += " " + s;
    throw ConfigError(msg);
  }
  return ic;
}

ModalBox ExperimentConfig::box() const {
  const int n = basis->n();
  const auto& b = dataset.bounds;
  Eigen::VectorXd hi(n);
  if (dataset.units == BoxUnits::Coefficient) {
    if (int(b.size()) != n)
      throw ConfigError("dataset.box.bounds needs " + std::to_string(n) +
                        " coefficient bounds, got " + std::to_string(b.size()));
    for (int i = 0; i < n; ++i) hi(i) = b[std::size_t(i)];
  } else {
    const double len = basis->domain().length(0);
    switch (basis->kind()) {
      case BasisKind::RealTrig: {
        // One bound per wavenumber: the constant scales by the constant's
        // norm, a wavenumber bounds the complex-pair amplitude, so each of
        // cos/sin gets twice the single-function norm.
        const int kmax = (n - 1) / 2;
        if (int(b.size()) != kmax + 1)
          throw ConfigError("dataset.box.bounds needs " + std::to_string(kmax + 1) +
                            " wavenumber bounds (constant through " + std::to_string(kmax) +
                            "), got " + std::to_string(b.size()));
        hi(0) = b[0] * std::sqrt(len);
        for (int k = 1; k <= kmax; ++k) {
          const double v = b[std::size_t(k)] * std::sqrt(2.0 * len);
          hi(2 * k - 1) = v;
          hi(2 * k) = v;
        }
        break;
      }
      case BasisKind::Sine: {
        if (int(b.size()) != n)
          throw ConfigError("dataset.box.bounds needs " + std::to_string(n) +
                            " wavenumber bounds, got " + std::to_string(b.size()));
        for (int i = 0; i < n; ++i) hi(i) = b[std::size_t(i)] * std::sqrt(len / 2.0);
        break;
      }
      default:
        throw ConfigError(
            "wavenumber units are only defined for the real-trig and sine bases; "
            "use coefficient units");
    }
  }
  ModalBox box;
  box.hi = hi;
  box.lo = -hi;
  box.validate();
  return box;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text,
                                             const std::string& source) {
  const json j = parse_text(text, source);
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  const Section top{&j, "", source};
  top.allow({"name", "basis", "pde", "solver", "dataset", "network", "training",
             "prediction", "output"});

  ExperimentConfig cfg;
  cfg.name = top.str("name", "");
  cfg.basis = parse_basis(top.sub("basis", true));
  cfg.pde = parse_pde(top.sub("pde", true));
  cfg.solver = parse_solver(top.sub("solver", false));
  cfg.dataset = parse_dataset(top.sub("dataset", true));
  cfg.network = parse_network(top.sub("network", true), cfg.basis->n());
  cfg.training = parse_training(top.sub("training", true), cfg.dataset.count);
  cfg.prediction = parse_prediction(top.sub("prediction", false));
  cfg.output = top.str("output", cfg.output);
  if (cfg.output.empty()) top.fail("output must not be empty");

  // Cross-section consistency.
  const auto& dom = cfg.basis->domain();
  const bool two_d = cfg.pde.kind == PdeKind::AdvectionDiffusion2d;
  if (two_d != (dom.dims == 2))
    top.fail("pde.kind " + to_string(cfg.pde.kind) + " needs a " +
             (two_d ? std::string("two") : std::string("one")) + "-dimensional basis");
  if ((cfg.pde.kind == PdeKind::ViscousBurgers ||
       cfg.pde.kind == PdeKind::InviscidBurgers) &&
      !(close_to(dom.lo[0], -kPi) && close_to(dom.hi[0], kPi)))
    top.fail("the Burgers solvers run on the interval (-pi, pi)");
  cfg.box();  // validates the bound count against the basis
  if (!cfg.prediction.ic.empty()) {
    const InitialCondition ic = make_initial_condition(cfg.prediction.ic);
    if (ic.dims != dom.dims)
      top.fail("prediction.ic '" + ic.id + "' is " + std::to_string(ic.dims) +
               "-dimensional but the domain is " + std::to_string(dom.dims) +
               "-dimensional");
  }

  cfg.resolved_json = j.dump(2);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path);
}

std::string apply_override(const std::string& json_text, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like path.to.key=value, got: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // not valid JSON: take it as a plain string
  }

  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    tokens.push_back(path.substr(start, dot - start));
    if (tokens.back().empty())
      throw ConfigError("empty path segment in override: " + assignment);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json root = parse_text(json_text, "configuration");
  json* cur = &root;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (cur->is_array()) {
      char* end = nullptr;
      const long idx = std::strtol(tok.c_str(), &end, 10);
      if (end == tok.c_str() || *end != '\0')
        throw ConfigError("array index expected at '" + tok + "' in override: " + assignment);
      if (idx < 0 || std::size_t(idx) >= cur->size())
        throw ConfigError("index " + tok + " is out of range in override: " + assignment);
      cur = &(*cur)[std::size_t(idx)];
    } else if (cur->is_object() || cur->is_null()) {
      cur = &(*cur)[tok];
    } else {
      throw ConfigError("override path passes through a scalar at '" + tok +
                        "': " + assignment);
    }
  }
  const std::string& last = tokens.back();
  if (cur->is_array()) {
    char* end = nullptr;
    const long idx = std::strtol(last.c_str(), &end, 10);
    if (end == last.c_str() || *end != '\0')
      throw ConfigError("array index expected at '" + last + "' in override: " + assignment);
    if (idx < 0 || std::size_t(idx) >= cur->size())
      throw ConfigError("index " + last + " is out of range in override: " + assignment);
    (*cur)[std::size_t(idx)] = value;
  } else if (cur->is_object() || cur->is_null()) {
    (*cur)[last] = value;
  } else {
    throw ConfigError("override path passes through a scalar at '" + last +
                      "': " + assignment);
  }
  return root.dump(2);
}

LockFile::LockFile(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  path_ = (fs::path(dir) / ".lock").string();
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST)
      throw ConfigError("output directory " + dir +
                        " is in use by another command (stale? remove " + path_ + ")");
    throw ConfigError("cannot create lock file " + path_ + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  if (::write(fd, pid.data(), pid.size()) < 0) {
    // Lock still works without the pid note.
  }
  ::close(fd);
}

LockFile::~LockFile() { ::unlink(path_.c_str()); }

namespace {

// Merges this command's view into manifest.json: its configuration, the
// hashes of the files it wrote, and an optional note object it fully owns.
void update_manifest(const ExperimentConfig& cfg, const std::string& command,
                     const std::vector<std::string>& files, const json& notes) {
  const fs::path dir(cfg.output);
  const fs::path mpath = dir / kManifestFile;
  json m;
  if (fs::exists(mpath)) {
    std::ifstream in(mpath);
    std::stringstream ss;
    ss << in.rdbuf();
    m = parse_text(ss.str(), mpath.string());
  }
  if (!cfg.name.empty()) m["experiment"] = cfg.name;
  m["commands"][command]["config"] = json::parse(cfg.resolved_json);
  if (notes.is_null()) {
    if (m.contains("notes")) m["notes"].erase(command);
  } else {
    m["notes"][command] = notes;
  }
  for (const auto& f : files) {
    const fs::path p = dir / f;
    m["files"][f] = {{"sha256", sha256_file_hex(p.string())},
                     {"bytes", fs::file_size(p)}};
  }
  std::ofstream out(mpath);
  if (!out) throw FormatError("cannot write " + mpath.string());
  out << m.dump(2) << "\n";
}

}  // namespace

void cmd_generate(const ExperimentConfig& cfg) {
  const LockFile lock(cfg.output);
  const fs::path dir(cfg.output);
  PairDataset ds = generate_modal_dataset(cfg.basis, cfg.box(), cfg.dataset.count,
                                          cfg.dataset.delta, cfg.pde, cfg.solver,
                                          cfg.dataset.seed);
  if (cfg.dataset.eta > 0) ds = add_noise(ds, cfg.dataset.eta, cfg.dataset.noise_seed);
  save_dataset((dir / kDatasetFile).string(), ds);
  cfg.basis->save_json((dir / kBasisFile).string());
  update_manifest(cfg, "generate", {kDatasetFile, kBasisFile}, {});
}

void cmd_train(const ExperimentConfig& cfg) {
  const LockFile lock(cfg.output);
  const fs::path dir(cfg.output);
  const std::string dpath = (dir / kDatasetFile).string();
  if (!fs::exists(dpath))
    throw ConfigError("no dataset at " + dpath + "; run the generate command first");
  const PairDataset ds = load_dataset(dpath);
  if (ds.n() != cfg.basis->n())
    throw ConfigError("dataset width " + std::to_string(ds.n()) +
                      " does not match the basis (" + std::to_string(cfg.basis->n()) + ")");
  if (!close_to(ds.delta, cfg.dataset.delta))
    throw ConfigError("dataset lag " + std::to_string(ds.delta) +
                      " does not match the configured " + std::to_string(cfg.dataset.delta));
  TrainConfig tc = cfg.training;
  if (tc.checkpoint_every > 0 && tc.checkpoint_path.empty())
    tc.checkpoint_path = (dir / "checkpoint").string();
  const ResNet start = ResNet::init(cfg.network);
  const TrainResult res = train(start, ds, tc);
  res.model.save((dir / kModelFile).string());
  res.history.save_csv((dir / kLossFile).string());
  json notes;
  notes["final_train_loss"] = res.history.train_loss.back();
  if (!res.history.val_loss.empty()) notes["final_val_loss"] = res.history.val_loss.back();
  update_manifest(cfg, "train", {kModelFile, kLossFile}, notes);
}

void cmd_predict(const ExperimentConfig& cfg) {
  const LockFile lock(cfg.output);
  const fs::path dir(cfg.output);
  if (cfg.prediction.ic.empty()) throw ConfigError("prediction.ic is not set");
  const std::string mpath = (dir / kModelFile).string();
  if (!fs::exists(mpath))
    throw ConfigError("no model at " + mpath + "; run the train command first");
  const ResNet model = ResNet::load(mpath);
  if (model.n() != cfg.basis->n())
    throw ConfigError("stored model width " + std::to_string(model.n()) +
                      " does not match the basis (" + std::to_string(cfg.basis->n()) + ")");
  const InitialCondition ic = make_initial_condition(cfg.prediction.ic);
  const int steps = cfg.prediction.horizon_steps;
  const Trajectory optimal =
      reference_trajectory(cfg.basis, ic, cfg.dataset.delta, steps, cfg.pde,
                           TrajKind::OptimalProjection, cfg.solver, cfg.prediction.reference);
  const Trajectory pred =
      rollout(model, ModalVector{cfg.basis, optimal.v[0]}, cfg.dataset.delta, steps);
  save_trajectory_csv((dir / kPredictedFile).string(), pred);
  save_trajectory_csv((dir / kOptimalFile).string(), optimal);
  std::vector<std::string> files{kPredictedFile, kOptimalFile};
  json notes;
  if (cfg.prediction.galerkin) {
    try {
      const Trajectory gal = galerkin_rollout(cfg.basis, optimal.v[0], cfg.dataset.delta,
                                              steps, cfg.pde, cfg.solver);
      save_trajectory_csv((dir / kGalerkinFile).string(), gal);
      files.push_back(kGalerkinFile);
    } catch (const NumericError& e) {
      notes["galerkin"] = std::string("modal ODE integration failed: ") + e.what();
      std::error_code ec;
      fs::remove(dir / kGalerkinFile, ec);  // never leave a stale comparison behind
    }
  }
  update_manifest(cfg, "predict", files, notes);
}

void cmd_analyze(const ExperimentConfig& cfg) {
  const LockFile lock(cfg.output);
  const fs::path dir(cfg.output);
  if (cfg.prediction.ic.empty()) throw ConfigError("prediction.ic is not set");
  const std::string mpath = (dir / kModelFile).string();
  if (!fs::exists(mpath))
    throw ConfigError("no model at " + mpath + "; run the train command first");
  const ResNet model = ResNet::load(mpath);
  if (model.n() != cfg.basis->n())
    throw ConfigError("stored model width " + std::to_string(model.n()) +
                      " does not match the basis (" + std::to_string(cfg.basis->n()) + ")");
  const InitialCondition ic = make_initial_condition(cfg.prediction.ic);
  const ErrorReport rep = theorem_bound_check(
      model, cfg.basis, cfg.pde, cfg.box(), cfg.prediction.probe_count,
      cfg.prediction.probe_seed, ic, cfg.dataset.delta, cfg.prediction.horizon_steps,
      cfg.solver, cfg.prediction.reference);
  rep.save_json((dir / kErrorReportFile).string());
  json notes;
  notes["bound_holds"] = rep.holds;
  notes["min_slack"] = rep.min_slack;
  update_manifest(cfg, "analyze", {kErrorReportFile}, notes);
}

}  // namespace mevo
