#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "planarm/rnd/randomization.hpp"
#include "planarm/sense/sense.hpp"
#include "planarm/sim/types.hpp"
#include "planarm/tasks/task.hpp"

namespace planarm::io {

struct PpoConfig {
  int num_envs = 50;
  int horizon = 50;
  double gamma = 0.95;
  double lam = 0.95;
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
  int epochs = 4;
  int minibatch = 800;
  double lr = 3e-4;
  double max_grad_norm = 0.5;
  double kl_abort = 0.5;
  double reward_scale = 0.1;
  int updates = 800;
  int grad_chunks = 8;
  int threads = 2;
};

struct NetConfig {
  int policy_hidden = 64;
  int encoder_hidden = 64;
  int z_dim = 16;
  int depth_feature = 32;
  int history_feature = 32;
  int history_len = 20;
};

struct AdapterConfig {
  double lr = 1e-3;
  int updates = 120;
  int minibatch = 256;
  int epochs = 2;
  double explore_std = 0.05;
  int val_every = 10;
  int val_episodes = 20;
};

struct AdrConfig {
  int buffer_size = 128;
  double sr_hi = 0.7;
  double sr_lo = 0.3;
  double step_frac = 0.05;
  double boundary_prob = 0.5;
  double init_frac = 0.1;
};

struct LibraryConfig {
  int per_category = 10;
  int held_out_total = 200;
  int peg_count = 10;
  int faucet_count = 20;
  uint64_t library_seed = 12345;
};

struct EvalConfig {
  int episodes = 500;
  int max_steps = 200;
  int heatmap_episodes = 20;
};

// Everything a run needs; serializes to an INI-style file whose canonical
// form defines the config digest embedded in all artifacts.
struct RunConfig {
  std::string task = "pick_place";
  uint64_t seed = 1;
  std::string out_dir = "runs/default";

  sim::ArmConfig arm;
  sense::DepthConfig depth;
  rnd::RandomizationSpec rand;
  int ramp_updates = 300;
  PpoConfig ppo;
  NetConfig net;
  AdapterConfig adapter;
  AdrConfig adr;
  LibraryConfig library;
  EvalConfig eval;

  tasks::TaskKind task_kind() const { return tasks::task_from_string(task); }

  std::string canonical() const;          // sorted key=value text
  std::string digest() const;             // FNV-1a 64 of canonical(), hex
  void save(const std::string& path) const;
  // Faults listing any unknown keys.
  static RunConfig load(const std::string& path);
  static RunConfig from_text(const std::string& text);
};

uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 1469598103934665603ULL);
std::string to_hex(uint64_t v);

}  // namespace planarm::io
