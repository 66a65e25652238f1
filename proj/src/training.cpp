#include "mevo/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "mevo/errors.hpp"
#include "mevo/philox.hpp"

namespace mevo {

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw ConfigError("unknown optimizer: " + s + " (expected adam or sgd)");
}

void TrainConfig::validate(int64_t dataset_size) const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (batch > dataset_size)
    throw ConfigError("batch size " + std::to_string(batch) + " exceeds dataset size " +
                      std::to_string(dataset_size));
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (validation_fraction < 0 || validation_fraction > 0.5)
    throw ConfigError("validation fraction must lie in [0, 0.5]");
  if (checkpoint_every < 0) throw ConfigError("checkpoint cadence must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty())
    throw ConfigError("checkpointing enabled but no checkpoint path given");
}

// Wall-clock timings stay in memory only: the file must be identical across
// reruns with the same seeds.
void LossHistory::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write loss history: " + path);
  const bool with_val = !val_loss.empty();
  out << (with_val ? "epoch,train_loss,val_loss\n" : "epoch,train_loss\n");
  char buf[96];
  for (std::size_t i = 0; i < train_loss.size(); ++i) {
    if (with_val)
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i + 1, train_loss[i],
                    val_loss[i]);
    else
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, train_loss[i]);
    out << buf;
  }
}

namespace {

constexpr char kOptMagic[4] = {'M', 'E', 'V', 'T'};
constexpr uint32_t kOptVersion = 1;

// Unbiased-enough draw of an integer in [0, bound) from one counter block.
uint64_t keyed_index(uint64_t seed, uint64_t stream, uint64_t counter, uint64_t bound) {
  const auto blk = philox::block(seed, stream, counter);
  const uint64_t r = (uint64_t(blk[0]) << 32) | blk[1];
  return uint64_t((__uint128_t(r) * bound) >> 64);
}

// Fisher-Yates keyed by (shuffle_seed, epoch); identical across runs.
void shuffle_indices(std::vector<int64_t>& idx, uint64_t seed, uint64_t epoch) {
  for (int64_t i = int64_t(idx.size()) - 1; i >= 1; --i) {
    const uint64_t j = keyed_index(seed, epoch, uint64_t(i), uint64_t(i) + 1);
    std::swap(idx[i], idx[int64_t(j)]);
  }
}

}  // namespace

void save_optimizer_state(const std::string& path, const OptimizerState& st) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write optimizer state: " + path);
  auto put = [&](const void* p, std::size_t len) {
    out.write(static_cast<const char*>(p), std::streamsize(len));
    if (!out) throw FormatError("short write to " + path);
  };
  put(kOptMagic, 4);
  put(&kOptVersion, 4);
  put(&st.next_epoch, 4);
  put(&st.step, 8);
  const uint64_t len = uint64_t(st.m.size());
  put(&len, 8);
  put(st.m.data(), sizeof(double) * st.m.size());
  put(st.v.data(), sizeof(double) * st.v.size());
}

OptimizerState load_optimizer_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open optimizer state: " + path);
  auto get = [&](void* p, std::size_t len) {
    in.read(static_cast<char*>(p), std::streamsize(len));
    if (in.gcount() != std::streamsize(len))
      throw FormatError("truncated optimizer state: " + path);
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kOptMagic, 4) != 0)
    throw FormatError("bad optimizer-state magic in " + path);
  uint32_t version = 0;
  get(&version, 4);
  if (version != kOptVersion)
    throw FormatError("unsupported optimizer-state version in " + path);
  OptimizerState st;
  get(&st.next_epoch, 4);
  get(&st.step, 8);
  uint64_t len = 0;
  get(&len, 8);
  st.m.resize(Eigen::Index(len));
  st.v.resize(Eigen::Index(len));
  get(st.m.data(), sizeof(double) * len);
  get(st.v.data(), sizeof(double) * len);
  return st;
}

TrainResult train(const ResNet& start, const PairDataset& ds, const TrainConfig& cfg,
                  const OptimizerState* resume) {
  ds.validate();
  cfg.validate(ds.size());
  if (!start.valid()) throw ConfigError("training needs an initialized network");
  if (ds.n() != start.n())
    throw ConfigError("dataset width " + std::to_string(ds.n()) +
                      " does not match network n = " + std::to_string(start.n()));

  const int64_t held_out = int64_t(std::floor(cfg.validation_fraction * double(ds.size())));
  const int64_t train_count = ds.size() - held_out;
  if (train_count < cfg.batch)
    throw ConfigError("validation split leaves fewer samples than one batch");
  const auto train_inputs = ds.inputs.topRows(train_count);
  const auto train_targets = ds.targets.topRows(train_count);

  TrainResult res;
  res.model = start;
  const int64_t nparam = res.model.param_count();

  Eigen::VectorXd theta, g;
  res.model.to_flat(theta);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(nparam), v = Eigen::VectorXd::Zero(nparam);
  uint64_t step = 0;
  uint32_t first_epoch = 0;
  if (resume) {
    step = resume->step;
    first_epoch = resume->next_epoch;
    if (cfg.optimizer == OptimizerKind::Adam) {
      if (resume->m.size() != nparam || resume->v.size() != nparam)
        throw ConfigError("optimizer state does not match the model's parameter count");
      m = resume->m;
      v = resume->v;
    }
    if (first_epoch >= uint32_t(cfg.epochs))
      throw ConfigError("resume epoch is past the configured epoch count");
  }

  std::vector<int64_t> order(train_count);
  ResNet::Gradients grad;
  Eigen::MatrixXd bin, btar;

  for (uint32_t epoch = first_epoch; epoch < uint32_t(cfg.epochs); ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), int64_t(0));
    shuffle_indices(order, cfg.shuffle_seed, epoch);

    double epoch_sum = 0.0;
    int64_t batch_index = 0;
    for (int64_t at = 0; at < train_count; at += cfg.batch, ++batch_index) {
      const int64_t bsize = std::min<int64_t>(cfg.batch, train_count - at);
      bin.resize(bsize, ds.n());
      btar.resize(bsize, ds.n());
      for (int64_t r = 0; r < bsize; ++r) {
        bin.row(r) = train_inputs.row(order[at + r]);
        btar.row(r) = train_targets.row(order[at + r]);
      }
      const double batch_loss = res.model.backward(bin, btar, grad);
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index) +
                           (cfg.checkpoint_path.empty()
                                ? ""
                                : "; last checkpoint retained at " + cfg.checkpoint_path));
      epoch_sum += batch_loss * double(bsize);

      Eigen::VectorXd gflat;
      grad.to_flat(gflat);
      res.model.to_flat(theta);
      if (cfg.optimizer == OptimizerKind::Adam) {
        ++step;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * gflat;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * gflat.cwiseProduct(gflat);
        const double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
        theta.array() -=
            cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
      } else {
        ++step;
        theta -= cfg.lr * gflat;
      }
      res.model.from_flat(theta);
    }

    res.history.train_loss.push_back(epoch_sum / double(train_count));
    if (held_out > 0)
      res.history.val_loss.push_back(res.model.loss(ds.inputs.bottomRows(held_out),
                                                    ds.targets.bottomRows(held_out)));
    const auto t1 = std::chrono::steady_clock::now();
    res.history.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

    if (cfg.checkpoint_every > 0 && (epoch + 1) % uint32_t(cfg.checkpoint_every) == 0) {
      const std::string base = cfg.checkpoint_path + ".ep" + std::to_string(epoch + 1);
      res.model.save(base);
      OptimizerState st;
      st.next_epoch = epoch + 1;
      st.step = step;
      if (cfg.optimizer == OptimizerKind::Adam) {
        st.m = m;
        st.v = v;
      }
      save_optimizer_state(base + ".opt", st);
    }
  }
  return res;
}

double evaluate(const ResNet& model, const PairDataset& ds) {
  ds.validate();
  return model.loss(ds.inputs, ds.targets);
}

}  // namespace mevo
