#pragma once

// Minibatch training of the residual network on coefficient pairs: Adam or
// plain SGD, keyed shuffling, optional validation split, loss history, and
// exactly resumable checkpoints.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mevo/dataset.hpp"
#include "mevo/resnet.hpp"

namespace mevo {

enum class OptimizerKind { Adam, Sgd };
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 1;
  int batch = 10;
  double lr = 0.001;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  uint64_t shuffle_seed = 0;
  double validation_fraction = 0.0;  // in [0, 0.5]; holds out the last rows
  int checkpoint_every = 0;          // epochs between checkpoints; 0 disables
  std::string checkpoint_path;       // base name; ".ep<N>" and ".opt" appended

  void validate(int64_t dataset_size) const;
};

struct LossHistory {
  std::vector<double> train_loss;  // epoch-mean training loss
  std::vector<double> val_loss;    // empty when no validation split
  std::vector<double> seconds;     // wall clock per epoch (not written to disk)
  void save_csv(const std::string& path) const;  // epoch,train_loss[,val_loss]
};

// Optimizer moments + progress counters; with the epoch-keyed shuffle this is
// everything needed to continue a run bit-identically.
struct OptimizerState {
  uint32_t next_epoch = 0;  // first epoch the resumed run should execute
  uint64_t step = 0;        // Adam bias-correction counter
  Eigen::VectorXd m, v;     // first/second moments (empty for SGD)
};

void save_optimizer_state(const std::string& path, const OptimizerState& st);
OptimizerState load_optimizer_state(const std::string& path);

struct TrainResult {
  ResNet model;
  LossHistory history;  // epochs executed by this call only
};

// Shuffled minibatch descent for cfg.epochs passes. Deterministic given the
// seeds: gradients accumulate serially in sample order. A non-finite loss
// aborts with the epoch and batch index (any checkpoints remain on disk).
// Pass `resume` (with the matching checkpointed model) to continue a run.
TrainResult train(const ResNet& start, const PairDataset& ds, const TrainConfig& cfg,
                  const OptimizerState* resume = nullptr);

// Loss over the full set, no updates; identical to model.loss on the data.
double evaluate(const ResNet& model, const PairDataset& ds);

}  // namespace mevo
