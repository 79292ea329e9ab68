#pragma once

#include <vector>

#include "planarm/nn/adam.hpp"
#include "planarm/nn/net.hpp"
#include "planarm/tasks/task.hpp"

namespace planarm::rl {

// Privileged encoder input layout: [0..7] physical parameters (scale,
// density, friction, force_scale, disturb_prob, mass, task_slot x2),
// [8..23] instance row, [24..39] category row, [40..43] privileged state
// (rotation cos/sin, finger contacts).
constexpr int kEPhysDim = 8;
constexpr int kDictDim = 16;
constexpr int kPrivStateDim = 4;
constexpr int kEncoderInputDim = kEPhysDim + 2 * kDictDim + kPrivStateDim;

// Learnable per-instance and per-category embedding tables.
struct Dictionaries {
  nn::Blob<float> instance_table;
  nn::Blob<float> category_table;

  void init(int num_instances, int num_categories, Rng& rng) {
    instance_table.name = "dict.instance";
    instance_table.shape = {num_instances, kDictDim};
    instance_table.val.resize(static_cast<size_t>(num_instances) * kDictDim);
    category_table.name = "dict.category";
    category_table.shape = {num_categories, kDictDim};
    category_table.val.resize(static_cast<size_t>(num_categories) * kDictDim);
    for (auto& v : instance_table.val) v = static_cast<float>(rng.normal(0.0, 0.3));
    for (auto& v : category_table.val) v = static_cast<float>(rng.normal(0.0, 0.3));
  }
  int num_instances() const { return instance_table.shape.empty() ? 0 : instance_table.shape[0]; }
  int num_categories() const { return category_table.shape.empty() ? 0 : category_table.shape[0]; }
};

struct EncoderConfig {
  int z_dim = 16;
  int hidden = 64;
  bool use_dictionaries = true;  // false: NoOE ablation (slots stay zero)
};

// Environment encoder mu: 3-layer MLP over the privileged concatenation.
class EnvEncoder {
 public:
  EnvEncoder() = default;
  EnvEncoder(const EncoderConfig& cfg, int num_instances, int num_categories,
             Rng& rng);

  // Assembles the 44-wide privileged input for the current episode/state.
  // Counts as a privileged read; rotation noise (degrees bound) is applied
  // from `rng`.
  std::vector<float> build_input(const tasks::TaskEnv& env,
                                 double rot_noise_deg, Rng& rng) const;

  std::vector<float> encode(const std::vector<float>& input) const;
  void forward(const std::vector<float>& input, nn::Fwd<float>& f) const;
  // Routes input-slot gradients back into the dictionary rows named by ids.
  void backward(const std::vector<float>& input, const nn::Fwd<float>& f,
                const std::vector<float>& dz, int instance_id, int category_id,
                std::vector<std::vector<float>>& gw,
                std::vector<std::vector<float>>& gb,
                std::vector<float>& g_instance_table,
                std::vector<float>& g_category_table) const;

  int z_dim() const { return cfg_.z_dim; }
  const EncoderConfig& config() const { return cfg_; }
  nn::Net<float>& net() { return net_; }
  const nn::Net<float>& net() const { return net_; }
  Dictionaries& dicts() { return dicts_; }
  const Dictionaries& dicts() const { return dicts_; }

  std::vector<nn::Blob<float>*> blobs() {
    auto out = net_.blobs();
    out.push_back(&dicts_.instance_table);
    out.push_back(&dicts_.category_table);
    return out;
  }
  int64_t param_count() const {
    return net_.param_count() + dicts_.instance_table.size() +
           dicts_.category_table.size();
  }

 private:
  EncoderConfig cfg_;
  nn::Net<float> net_;
  Dictionaries dicts_;
};

struct PolicyConfig {
  int obs_dim = 17;
  int z_dim = 16;      // 0 for DR-style policies
  int goal_dim = 6;
  int extra_dim = 0;   // end-to-end depth feature width (DR+Vi)
  int hidden = 64;
  int act_dim = 5;
  double init_log_std = -0.5;

  int input_dim() const { return obs_dim + z_dim + goal_dim + extra_dim; }
};

// Goal-conditioned Gaussian policy: 4-layer trunk (3 tanh hidden + linear
// heads) emitting the action mean and a value estimate; actions are sampled
// from N(mean, exp(log_std)) and squashed by tanh.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(const PolicyConfig& cfg, Rng& rng);

  struct ActOut {
    std::vector<double> action;     // squashed, in [-1, 1]
    std::vector<float> pre_squash;  // sampled u before tanh
    double log_prob = 0.0;
    double value = 0.0;
  };
  ActOut act(const std::vector<float>& input, Rng& rng,
             bool deterministic) const;

  // Log-probability of stored pre-squash sample u under the current
  // parameters (tanh-correction included), plus entropy and value.
  struct Eval {
    double log_prob = 0.0;
    double entropy = 0.0;
    double value = 0.0;
  };

  struct Caches {
    nn::Fwd<float> trunk, mean, value;
    std::vector<float> mean_out;
  };
  Eval eval_action(const std::vector<float>& input,
                   const std::vector<float>& pre_squash, Caches& c) const;

  // Backward pass for the PPO loss: dmean/dlogstd/dvalue are gradients of
  // the scalar loss w.r.t. the mean head output, log_std, and value output.
  struct Grads {
    std::vector<std::vector<float>> trunk_w, trunk_b;
    std::vector<std::vector<float>> mean_w, mean_b;
    std::vector<std::vector<float>> value_w, value_b;
    std::vector<float> log_std;
    std::vector<float> dinput;  // gradient w.r.t. the assembled input
  };
  void make_grads(Grads& g) const;
  void backward(const std::vector<float>& input, const Caches& c,
                const std::vector<float>& dmean, const std::vector<float>& dlog_std,
                double dvalue, Grads& g) const;

  const PolicyConfig& config() const { return cfg_; }
  std::vector<nn::Blob<float>*> blobs() {
    auto out = trunk_.blobs();
    for (auto* b : mean_head_.blobs()) out.push_back(b);
    for (auto* b : value_head_.blobs()) out.push_back(b);
    out.push_back(&log_std_);
    return out;
  }
  int64_t param_count() const {
    return trunk_.param_count() + mean_head_.param_count() +
           value_head_.param_count() + static_cast<int64_t>(log_std_.size());
  }
  const nn::Blob<float>& log_std() const { return log_std_; }
  const nn::Net<float>& trunk() const { return trunk_; }
  const nn::Net<float>& mean_head() const { return mean_head_; }
  const nn::Net<float>& value_head() const { return value_head_; }

 private:
  PolicyConfig cfg_;
  nn::Net<float> trunk_;
  nn::Net<float> mean_head_;
  nn::Net<float> value_head_;
  nn::Blob<float> log_std_;

  friend class PolicyGradHelper;
};

}  // namespace planarm::rl
