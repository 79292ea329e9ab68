#pragma once

#include <deque>
#include <memory>

#include "planarm/io/checkpoint.hpp"
#include "planarm/io/config.hpp"
#include "planarm/io/metrics.hpp"
#include "planarm/rl/model.hpp"
#include "planarm/rl/trainer.hpp"
#include "planarm/rnd/randomization.hpp"

namespace planarm::adapt {

// Ring of the last H (observation, action) pairs, zero-padded before step H.
// Channel-major layout for the 1D history convolution: [channel][time],
// oldest first.
class HistoryBuffer {
 public:
  HistoryBuffer(int obs_dim, int act_dim, int len)
      : obs_dim_(obs_dim), act_dim_(act_dim), len_(len) {
    clear();
  }

  void clear() {
    data_.assign(static_cast<size_t>(len_) * (obs_dim_ + act_dim_), 0.0f);
    count_ = 0;
  }

  void push(const std::vector<float>& obs, const std::vector<float>& action) {
    if (static_cast<int>(obs.size()) != obs_dim_ ||
        static_cast<int>(action.size()) != act_dim_)
      throw Fault("HistoryBuffer: dimension mismatch");
    // Shift left one time slot per channel, append at the end.
    const int ch = obs_dim_ + act_dim_;
    for (int c = 0; c < ch; ++c) {
      float* row = data_.data() + static_cast<size_t>(c) * len_;
      for (int t = 0; t + 1 < len_; ++t) row[t] = row[t + 1];
      row[len_ - 1] = c < obs_dim_ ? obs[c] : action[c - obs_dim_];
    }
    count_ = std::min(count_ + 1, len_);
  }

  const std::vector<float>& channels() const { return data_; }
  int channel_count() const { return obs_dim_ + act_dim_; }
  int length() const { return len_; }
  int filled() const { return count_; }

 private:
  int obs_dim_, act_dim_, len_;
  int count_ = 0;
  std::vector<float> data_;
};

// Depth encoder psi, state-action history encoder, and the adapter head phi
// whose output dimension must equal the frozen teacher's z.
struct AdapterNets {
  nn::Net<float> psi;      // scan -> depth feature f_t
  nn::Net<float> history;  // (obs+act, H) -> history feature
  nn::Net<float> phi;      // concat -> z_hat

  AdapterNets() = default;
  AdapterNets(const io::RunConfig& cfg, int z_dim, Rng& rng);

  std::vector<nn::Blob<float>*> blobs() {
    auto out = psi.blobs();
    for (auto* b : history.blobs()) out.push_back(b);
    for (auto* b : phi.blobs()) out.push_back(b);
    return out;
  }
  int64_t param_count() const {
    return psi.param_count() + history.param_count() + phi.param_count();
  }
};

// z_hat = phi(history_features ++ psi(d_t)). `use_vision` false (NoVA)
// replaces the depth-feature slot with zeros.
std::vector<float> adapt_predict(const AdapterNets& nets,
                                 const HistoryBuffer& history,
                                 const std::vector<float>& scan,
                                 bool use_vision);

struct AdapterLossPoint {
  int update = 0;
  double train_loss = 0.0;
  double val_loss = -1.0;  // held-out validation rollouts; -1 when not probed
};

// Phase-2 training: on-policy rollouts where the frozen policy consumes the
// student estimate z_hat; minimizes ||z - z_hat||^2 against the frozen
// teacher's z. Returns the loss curve.
class Phase2Trainer {
 public:
  Phase2Trainer(const io::RunConfig& cfg, const rl::PolicyModel* frozen_policy,
                const rl::EnvEncoder* frozen_encoder,
                const tasks::ObjectLibrary* library, bool use_vision,
                uint64_t seed);

  std::vector<AdapterLossPoint> run(io::MetricsWriter* metrics = nullptr);
  double initial_val_loss();

  AdapterNets& nets() { return nets_; }
  const AdapterNets& nets() const { return nets_; }
  bool use_vision() const { return use_vision_; }

  io::Checkpoint make_checkpoint(const std::string& teacher_digest) const;

 private:
  struct Slot;
  double rollout_and_collect(std::vector<Slot>& slots, int steps,
                             bool collect, Rng& shuffle_rng);
  double validation_loss();

  io::RunConfig cfg_;
  const rl::PolicyModel* policy_;
  const rl::EnvEncoder* encoder_;
  const tasks::ObjectLibrary* library_;
  bool use_vision_;
  uint64_t seed_;
  tasks::EnvConfig env_cfg_;
  rnd::RandomizationSpec spec_;
  AdapterNets nets_;
  nn::Adam<float> adam_;

  struct Record {
    std::vector<float> hist;  // flattened channels
    std::vector<float> scan;
    std::vector<float> z;     // teacher target
  };
  std::vector<Record> records_;
};

}  // namespace planarm::adapt
