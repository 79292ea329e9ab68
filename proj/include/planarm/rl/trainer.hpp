#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "planarm/io/checkpoint.hpp"
#include "planarm/io/config.hpp"
#include "planarm/io/metrics.hpp"
#include "planarm/rl/model.hpp"
#include "planarm/rnd/randomization.hpp"

namespace planarm::rl {

enum class TrainVariant { teacher, nooe, dr, dr_vi, adr };

std::string to_string(TrainVariant v);
TrainVariant train_variant_from_string(const std::string& s);

// Depth feature extractor: 3 conv1d layers collapsing the scan to `feat`
// channels (a linear projection is appended only when the conv output does
// not already match).
nn::Net<float> make_depth_net(const std::string& name, int rays, int feat,
                              Rng& rng);
// State-action history encoder: 4 conv1d layers over the time axis.
nn::Net<float> make_history_net(const std::string& name, int channels, int len,
                                int feat, Rng& rng);

struct UpdateStats {
  int update = 0;
  int64_t env_steps = 0;
  int episodes = 0;
  double mean_return = 0.0;   // raw (unscaled) episode returns
  double success_rate = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double pg_loss = 0.0;
  double v_loss = 0.0;
  double ramp = 0.0;
};

// Phase-1 PPO over vectorized task environments. Covers the privileged
// teacher, the NoOE ablation, and the DR / DR+Vi / ADR baselines (identical
// PPO hyperparameters; only the policy inputs and the sampling of
// environment parameters differ).
class Phase1Trainer {
 public:
  Phase1Trainer(const io::RunConfig& cfg, TrainVariant variant,
                const tasks::ObjectLibrary* library, uint64_t seed);
  ~Phase1Trainer();

  void run(io::MetricsWriter* metrics = nullptr,
           const std::function<void(const UpdateStats&)>& on_update = nullptr);
  UpdateStats run_one_update();

  PolicyModel& policy() { return *policy_; }
  EnvEncoder* encoder() { return encoder_ ? encoder_.get() : nullptr; }
  nn::Net<float>* vision_net() { return vis_ ? vis_.get() : nullptr; }
  const rnd::AdrState* adr_state() const { return adr_ ? &*adr_ : nullptr; }
  const rnd::CurriculumState& curriculum() const { return curriculum_; }
  TrainVariant variant() const { return variant_; }
  int update_index() const { return update_idx_; }
  int64_t env_steps() const { return env_steps_; }

  io::Checkpoint make_checkpoint() const;
  void restore(const io::Checkpoint& ck);

  std::vector<nn::Blob<float>*> trainable_blobs();

  // Mean wall-clock seconds spent stepping + acting per environment step,
  // exposed so DR vs DR+Vi per-step cost can be reported.
  double mean_step_seconds() const {
    return env_steps_ > 0 ? step_seconds_ / static_cast<double>(env_steps_) : 0.0;
  }

 private:
  struct Sample;
  struct EnvSlot;
  struct GradBundle;

  void reset_env(EnvSlot& slot);
  void collect_rollout();
  UpdateStats optimize();
  std::vector<float> assemble_input(const Sample& s,
                                    const std::vector<float>& dyn) const;
  int dyn_dim() const;

  io::RunConfig cfg_;
  TrainVariant variant_;
  const tasks::ObjectLibrary* library_;
  tasks::EnvConfig env_cfg_;
  rnd::RandomizationSpec spec_;
  rnd::CurriculumState curriculum_;
  std::optional<rnd::AdrState> adr_;

  std::unique_ptr<PolicyModel> policy_;
  std::unique_ptr<EnvEncoder> encoder_;
  std::unique_ptr<nn::Net<float>> vis_;
  nn::Adam<float> adam_;

  std::vector<std::unique_ptr<EnvSlot>> envs_;
  std::vector<Sample> samples_;
  Rng trainer_rng_;
  int update_idx_ = 0;
  int64_t env_steps_ = 0;
  double step_seconds_ = 0.0;

  struct EpisodeResult {
    double raw_return = 0.0;
    bool success = false;
    rnd::AdrState::BoundaryTag tag;
  };
  std::vector<EpisodeResult> finished_;  // merged in env-index order
};

}  // namespace planarm::rl
