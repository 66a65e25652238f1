#pragma once

// Training pairs (v(0), v(delta)): sampling in modal space, pairing of
// projected snapshots, multiplicative noise, and binary/CSV io.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mevo/basis.hpp"
#include "mevo/solvers.hpp"

namespace mevo {

struct ModalBox {
  Eigen::VectorXd lo, hi;
  void validate() const;  // matching lengths, lo <= hi
  int dim() const { return int(lo.size()); }
};

enum class DatasetProvenance { ModalSampled, SnapshotPaired };
std::string to_string(DatasetProvenance p);

struct PairDataset {
  double delta = 0.0;
  double eta = 0.0;  // multiplicative noise level applied, 0 = clean
  DatasetProvenance provenance = DatasetProvenance::ModalSampled;
  Eigen::MatrixXd inputs;   // J x n
  Eigen::MatrixXd targets;  // J x n
  int64_t size() const { return inputs.rows(); }
  int n() const { return int(inputs.cols()); }
  void validate() const;
};

// One uniform draw from the box; deterministic in (seed, j), coordinate i
// consumes counter index i. Safe to call concurrently for distinct j.
Eigen::VectorXd sample_box_point(const ModalBox& box, uint64_t seed, uint64_t j);

std::vector<ModalVector> sample_modal_box(const BasisPtr& basis, const ModalBox& box,
                                          int64_t count, uint64_t seed);

// Evolves every sample by one lag through the reference dynamics. Solver
// failures carry the offending sample index. Parallel over samples; results
// are identical to the sequential path for any worker count.
PairDataset generate_pairs(const std::vector<ModalVector>& samples, double delta,
                           const PdeSpec& pde, const SolverConfig& solver,
                           bool parallel = true);

// Fused sampling + evolution without materializing the sample list.
PairDataset generate_modal_dataset(const BasisPtr& basis, const ModalBox& box,
                                   int64_t count, double delta, const PdeSpec& pde,
                                   const SolverConfig& solver, uint64_t seed,
                                   bool parallel = true);

struct SnapshotTrajectory {
  std::string id;
  std::vector<double> times;        // strictly increasing
  std::vector<FieldSample> fields;  // on the basis quadrature grid
};

struct SnapshotSet {
  BasisPtr basis;
  std::vector<SnapshotTrajectory> trajectories;
  void validate() const;
};

// Projects every within-trajectory pair separated by the lag (within tau_t).
// No qualifying pair -> ConfigError listing the nearest gaps per trajectory.
PairDataset pair_snapshots(const SnapshotSet& snapshots, double delta, double tau_t);

// Every entry of inputs and targets multiplied by an independent (1 + e),
// e ~ U(-eta, eta). Zero entries stay zero; eta = 0 returns the input.
PairDataset add_noise(const PairDataset& ds, double eta, uint64_t seed);

// Binary format: header {magic "MEVD", version u32, n u32, J u64, delta f64,
// eta f64}, then inputs and targets as row-major little-endian f64.
void save_dataset(const std::string& path, const PairDataset& ds);
PairDataset load_dataset(const std::string& path);

// Debug export, columns v0_1..v0_n,vd_1..vd_n.
void save_dataset_csv(const std::string& path, const PairDataset& ds);

}  // namespace mevo
