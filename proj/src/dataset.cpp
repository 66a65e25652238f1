#include "mevo/dataset.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "mevo/errors.hpp"
#include "mevo/parallel.hpp"
#include "mevo/philox.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset io assumes a little-endian host");

namespace mevo {

void ModalBox::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw ConfigError("modal box needs matching non-empty lo/hi");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(lo(i) <= hi(i)))
      throw ConfigError("modal box coordinate " + std::to_string(i + 1) +
                        " has lo > hi");
}

std::string to_string(DatasetProvenance p) {
  return p == DatasetProvenance::ModalSampled ? "modal-sampled" : "snapshot-paired";
}

void PairDataset::validate() const {
  if (inputs.rows() != targets.rows() || inputs.cols() != targets.cols())
    throw ConfigError("dataset inputs/targets shape mismatch");
  if (inputs.rows() < 1) throw ConfigError("dataset is empty");
  if (!(delta > 0)) throw ConfigError("dataset time lag must be positive");
  if (eta < 0) throw ConfigError("dataset noise level must be >= 0");
  if (!inputs.allFinite() || !targets.allFinite())
    throw NumericError("dataset contains non-finite entries");
}

Eigen::VectorXd sample_box_point(const ModalBox& box, uint64_t seed, uint64_t j) {
  Eigen::VectorXd v(box.dim());
  for (int i = 0; i < box.dim(); ++i)
    v(i) = philox::uniform(seed, j, uint64_t(i), box.lo(i), box.hi(i));
  return v;
}

std::vector<ModalVector> sample_modal_box(const BasisPtr& basis, const ModalBox& box,
                                          int64_t count, uint64_t seed) {
  box.validate();
  if (count < 1) throw ConfigError("sample count must be >= 1");
  if (box.dim() != basis->n())
    throw ConfigError("modal box dimension " + std::to_string(box.dim()) +
                      " does not match basis n = " + std::to_string(basis->n()));
  std::vector<ModalVector> out(count);
  for (int64_t j = 0; j < count; ++j)
    out[j] = ModalVector{basis, sample_box_point(box, seed, uint64_t(j))};
  return out;
}

namespace {

// Evolve rows [0, J) with targets(j) = evolver.step(inputs(j)); the first
// failing sample index is re-run serially so its error surfaces with context.
void evolve_rows(const ModalEvolver& evolver, const Eigen::MatrixXd& inputs,
                 Eigen::MatrixXd& targets, double delta, bool parallel) {
  const int64_t count = inputs.rows();
  std::atomic<int64_t> first_bad{std::numeric_limits<int64_t>::max()};
  parallel_for(
      count,
      [&](int64_t j) {
        int64_t expect = first_bad.load(std::memory_order_relaxed);
        if (j > expect) return;  // a lower index already failed
        try {
          targets.row(j) = evolver.step(inputs.row(j).transpose(), delta).transpose();
        } catch (const std::exception&) {
          while (expect > j &&
                 !first_bad.compare_exchange_weak(expect, j, std::memory_order_relaxed)) {
          }
        }
      },
      parallel);
  const int64_t bad = first_bad.load();
  if (bad != std::numeric_limits<int64_t>::max()) {
    try {
      evolver.step(inputs.row(bad).transpose(), delta);
      throw NumericError("sample " + std::to_string(bad) +
                         " failed under parallel evolution but not serially");
    } catch (const Error& e) {
      throw NumericError("evolving sample " + std::to_string(bad) + " failed: " +
                         e.what());
    }
  }
}

}  // namespace

PairDataset generate_pairs(const std::vector<ModalVector>& samples, double delta,
                           const PdeSpec& pde, const SolverConfig& solver,
                           bool parallel) {
  if (samples.empty()) throw ConfigError("generate_pairs needs at least one sample");
  if (!(delta > 0)) throw ConfigError("time lag must be positive");
  const BasisPtr& basis = samples[0].basis;
  for (const auto& s : samples) {
    s.validate();
    if (s.basis != basis) throw ConfigError("samples must share one basis");
  }
  PairDataset ds;
  ds.delta = delta;
  ds.provenance = DatasetProvenance::ModalSampled;
  ds.inputs.resize(int64_t(samples.size()), basis->n());
  ds.targets.resize(int64_t(samples.size()), basis->n());
  for (int64_t j = 0; j < int64_t(samples.size()); ++j)
    ds.inputs.row(j) = samples[j].v.transpose();
  ModalEvolver evolver(basis, pde, solver);
  evolve_rows(evolver, ds.inputs, ds.targets, delta, parallel);
  ds.validate();
  return ds;
}

PairDataset generate_modal_dataset(const BasisPtr& basis, const ModalBox& box,
                                   int64_t count, double delta, const PdeSpec& pde,
                                   const SolverConfig& solver, uint64_t seed,
                                   bool parallel) {
  box.validate();
  if (count < 1) throw ConfigError("sample count must be >= 1");
  if (box.dim() != basis->n())
    throw ConfigError("modal box dimension " + std::to_string(box.dim()) +
                      " does not match basis n = " + std::to_string(basis->n()));
  if (!(delta > 0)) throw ConfigError("time lag must be positive");
  PairDataset ds;
  ds.delta = delta;
  ds.provenance = DatasetProvenance::ModalSampled;
  ds.inputs.resize(count, basis->n());
  ds.targets.resize(count, basis->n());
  for (int64_t j = 0; j < count; ++j)
    ds.inputs.row(j) = sample_box_point(box, seed, uint64_t(j)).transpose();
  ModalEvolver evolver(basis, pde, solver);
  evolve_rows(evolver, ds.inputs, ds.targets, delta, parallel);
  ds.validate();
  return ds;
}

void SnapshotSet::validate() const {
  if (!basis) throw ConfigError("snapshot set has no basis");
  for (const auto& tr : trajectories) {
    if (tr.times.size() != tr.fields.size())
      throw ConfigError("trajectory '" + tr.id + "' has mismatched times/fields");
    for (std::size_t k = 1; k < tr.times.size(); ++k)
      if (!(tr.times[k] > tr.times[k - 1]))
        throw ConfigError("trajectory '" + tr.id + "' times must strictly increase");
  }
}

PairDataset pair_snapshots(const SnapshotSet& snapshots, double delta, double tau_t) {
  snapshots.validate();
  if (!(delta > 0)) throw ConfigError("time lag must be positive");
  if (tau_t < 0) throw ConfigError("time tolerance must be >= 0");
  const BasisPtr& basis = snapshots.basis;

  std::vector<Eigen::VectorXd> ins, outs;
  std::ostringstream nearest;
  for (const auto& tr : snapshots.trajectories) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < tr.times.size(); ++a)
      for (std::size_t b = a + 1; b < tr.times.size(); ++b) {
        const double gap = tr.times[b] - tr.times[a];
        best = std::min(best, std::abs(gap - delta));
        if (std::abs(gap - delta) <= tau_t) {
          ins.push_back(project(tr.fields[a], basis).v);
          outs.push_back(project(tr.fields[b], basis).v);
        }
      }
    nearest << (nearest.tellp() > 0 ? "; " : "") << "'" << tr.id << "' nearest gap off by "
            << (std::isfinite(best) ? std::to_string(best) : "n/a (single snapshot)");
  }
  if (ins.empty())
    throw ConfigError("no snapshot pairs separated by the lag " + std::to_string(delta) +
                      " within tolerance " + std::to_string(tau_t) + " (" + nearest.str() +
                      ")");
  PairDataset ds;
  ds.delta = delta;
  ds.provenance = DatasetProvenance::SnapshotPaired;
  ds.inputs.resize(int64_t(ins.size()), basis->n());
  ds.targets.resize(int64_t(ins.size()), basis->n());
  for (int64_t j = 0; j < int64_t(ins.size()); ++j) {
    ds.inputs.row(j) = ins[j].transpose();
    ds.targets.row(j) = outs[j].transpose();
  }
  ds.validate();
  return ds;
}

PairDataset add_noise(const PairDataset& ds, double eta, uint64_t seed) {
  ds.validate();
  if (eta < 0) throw ConfigError("noise level must be >= 0");
  PairDataset out = ds;
  out.eta = eta;
  if (eta == 0) return out;
  const int n = ds.n();
  for (int64_t j = 0; j < ds.size(); ++j)
    for (int i = 0; i < n; ++i) {
      out.inputs(j, i) *= 1.0 + philox::uniform(seed, uint64_t(j), uint64_t(i), -eta, eta);
      out.targets(j, i) *=
          1.0 + philox::uniform(seed, uint64_t(j), uint64_t(n + i), -eta, eta);
    }
  return out;
}

namespace {

constexpr char kMagic[4] = {'M', 'E', 'V', 'D'};
constexpr uint32_t kVersion = 1;

void write_exact(std::ofstream& out, const void* p, std::size_t len, const std::string& path) {
  out.write(static_cast<const char*>(p), std::streamsize(len));
  if (!out) throw FormatError("short write to " + path);
}

void read_exact(std::ifstream& in, void* p, std::size_t len, const std::string& path) {
  in.read(static_cast<char*>(p), std::streamsize(len));
  if (in.gcount() != std::streamsize(len))
    throw FormatError("truncated dataset file: " + path);
}

}  // namespace

void save_dataset(const std::string& path, const PairDataset& ds) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write dataset: " + path);
  write_exact(out, kMagic, 4, path);
  const uint32_t version = kVersion, n = uint32_t(ds.n());
  const uint64_t count = uint64_t(ds.size());
  write_exact(out, &version, 4, path);
  write_exact(out, &n, 4, path);
  write_exact(out, &count, 8, path);
  write_exact(out, &ds.delta, 8, path);
  write_exact(out, &ds.eta, 8, path);
  // Row-major: one sample per row, coefficients contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor tmp = ds.inputs;
  write_exact(out, tmp.data(), sizeof(double) * tmp.size(), path);
  tmp = ds.targets;
  write_exact(out, tmp.data(), sizeof(double) * tmp.size(), path);
}

PairDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset: " + path);
  char magic[4];
  read_exact(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad dataset magic in " + path + " (corrupted or not a dataset)");
  uint32_t version = 0, n = 0;
  uint64_t count = 0;
  read_exact(in, &version, 4, path);
  if (version != kVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version) + " in " +
                      path);
  read_exact(in, &n, 4, path);
  read_exact(in, &count, 8, path);
  PairDataset ds;
  read_exact(in, &ds.delta, 8, path);
  read_exact(in, &ds.eta, 8, path);
  if (n < 1 || count < 1)
    throw FormatError("dataset header declares an empty set: " + path);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int64_t rows = int64_t(count);
  const int cols = int(n);
  RowMajor tmp(rows, cols);
  read_exact(in, tmp.data(), sizeof(double) * tmp.size(), path);
  ds.inputs = tmp;
  read_exact(in, tmp.data(), sizeof(double) * tmp.size(), path);
  ds.targets = tmp;
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw FormatError("trailing bytes after dataset payload: " + path);
  ds.validate();
  return ds;
}

void save_dataset_csv(const std::string& path, const PairDataset& ds) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write dataset CSV: " + path);
  const int n = ds.n();
  for (int i = 1; i <= n; ++i) out << "v0_" << i << ",";
  for (int i = 1; i <= n; ++i) out << "vd_" << i << (i == n ? "\n" : ",");
  char buf[32];
  for (int64_t j = 0; j < ds.size(); ++j) {
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.inputs(j, i));
      out << buf << ",";
    }
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.targets(j, i));
      out << buf << (i == n - 1 ? "\n" : ",");
    }
  }
}

}  // namespace mevo
