#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "planarm/adapt/adapter.hpp"
#include "planarm/io/config.hpp"

using namespace planarm;
using namespace planarm::adapt;

namespace {

io::RunConfig tiny_cfg() {
  io::RunConfig cfg;
  cfg.task = "pick_place";
  cfg.ppo.num_envs = 4;
  cfg.ppo.horizon = 12;
  cfg.net.policy_hidden = 16;
  cfg.net.encoder_hidden = 16;
  cfg.adapter.updates = 2;
  cfg.adapter.minibatch = 24;
  cfg.adapter.epochs = 1;
  cfg.adapter.val_every = 1;
  cfg.adapter.val_episodes = 2;
  cfg.ppo.threads = 2;
  return cfg;
}

struct Teacher {
  tasks::ObjectLibrary lib;
  rl::PolicyModel policy;
  rl::EnvEncoder encoder;

  explicit Teacher(const io::RunConfig& cfg)
      : lib(tasks::make_pick_library(tasks::Split::train, 10, 1)),
        policy(make_policy_cfg(cfg), rng_),
        encoder(make_enc_cfg(cfg), lib.size(), lib.num_categories(), rng_) {}

  static rl::PolicyConfig make_policy_cfg(const io::RunConfig& cfg) {
    rl::PolicyConfig pc;
    pc.obs_dim = sense::Observation::kDim;
    pc.goal_dim = tasks::goal_dim(tasks::TaskKind::pick_place);
    pc.hidden = cfg.net.policy_hidden;
    pc.z_dim = cfg.net.z_dim;
    return pc;
  }
  static rl::EncoderConfig make_enc_cfg(const io::RunConfig& cfg) {
    rl::EncoderConfig ec;
    ec.z_dim = cfg.net.z_dim;
    ec.hidden = cfg.net.encoder_hidden;
    return ec;
  }

 private:
  Rng rng_{42};
};

std::vector<float> all_params(std::vector<nn::Blob<float>*> blobs) {
  std::vector<float> out;
  for (auto* b : blobs) out.insert(out.end(), b->val.begin(), b->val.end());
  return out;
}

}  // namespace

TEST_CASE("history buffer: zero padding, chronology, constant length") {
  HistoryBuffer h(2, 1, 4);
  CHECK(h.channels().size() == 3 * 4);
  for (float v : h.channels()) CHECK(v == 0.0f);
  h.push({1.0f, 10.0f}, {100.0f});
  h.push({2.0f, 20.0f}, {200.0f});
  const auto& c = h.channels();
  // channel 0 (obs[0]): [0, 0, 1, 2]
  CHECK(c[0] == 0.0f);
  CHECK(c[1] == 0.0f);
  CHECK(c[2] == 1.0f);
  CHECK(c[3] == 2.0f);
  // channel 2 (action): [0, 0, 100, 200]
  CHECK(c[8 + 2] == 100.0f);
  CHECK(c[8 + 3] == 200.0f);
  for (int i = 0; i < 6; ++i) h.push({9.0f, 9.0f}, {9.0f});
  CHECK(h.channels().size() == 12);
  CHECK(h.filled() == 4);
}

TEST_CASE("adapt_predict is pure and finite at the start of an episode") {
  io::RunConfig cfg = tiny_cfg();
  Rng rng(1);
  AdapterNets nets(cfg, cfg.net.z_dim, rng);
  HistoryBuffer h(sense::Observation::kDim, 5, cfg.net.history_len);
  std::vector<float> scan(cfg.depth.rays, 1.0f);
  const auto a = adapt_predict(nets, h, scan, true);
  const auto b = adapt_predict(nets, h, scan, true);
  CHECK(a == b);
  REQUIRE(static_cast<int>(a.size()) == cfg.net.z_dim);
  for (float v : a) CHECK(std::isfinite(v));
}

TEST_CASE("NoVA: scan perturbations do not change the prediction") {
  io::RunConfig cfg = tiny_cfg();
  Rng rng(2);
  AdapterNets nets(cfg, cfg.net.z_dim, rng);
  HistoryBuffer h(sense::Observation::kDim, 5, cfg.net.history_len);
  std::vector<float> scan_a(cfg.depth.rays, 1.0f);
  std::vector<float> scan_b(cfg.depth.rays, 0.25f);
  CHECK(adapt_predict(nets, h, scan_a, false) ==
        adapt_predict(nets, h, scan_b, false));
  CHECK(adapt_predict(nets, h, scan_a, true) !=
        adapt_predict(nets, h, scan_b, true));
}

TEST_CASE("phi output dimension must match the teacher z") {
  io::RunConfig cfg = tiny_cfg();
  Teacher teacher(cfg);
  io::RunConfig bad = cfg;
  bad.net.z_dim = 8;  // teacher was built with 16
  // Mismatched z dimensions are rejected at construction.
  rl::PolicyConfig pc = Teacher::make_policy_cfg(bad);
  Rng rng(3);
  rl::PolicyModel bad_policy(pc, rng);
  CHECK_THROWS_AS(Phase2Trainer(bad, &bad_policy, &teacher.encoder,
                                &teacher.lib, true, 1),
                  Fault);
}

TEST_CASE("adapter training leaves the teacher bitwise unchanged") {
  io::RunConfig cfg = tiny_cfg();
  Teacher teacher(cfg);
  const std::vector<float> policy_before = all_params(teacher.policy.blobs());
  const std::vector<float> encoder_before = all_params(teacher.encoder.blobs());
  Phase2Trainer trainer(cfg, &teacher.policy, &teacher.encoder, &teacher.lib,
                        true, 5);
  const auto curve = trainer.run();
  CHECK(curve.size() == 2);
  CHECK(all_params(teacher.policy.blobs()) == policy_before);
  CHECK(all_params(teacher.encoder.blobs()) == encoder_before);
  for (const auto& p : curve) CHECK(p.train_loss >= 0.0);
}

TEST_CASE("oracle mode: student loop with teacher z matches phase-1 rollout") {
  io::RunConfig cfg = tiny_cfg();
  Teacher teacher(cfg);
  tasks::EnvConfig env_cfg;
  env_cfg.kind = tasks::TaskKind::pick_place;
  env_cfg.arm = cfg.arm;
  env_cfg.depth = cfg.depth;

  auto rollout = [&](bool via_adapter_path) {
    tasks::TaskEnv env(env_cfg, &teacher.lib, 99);
    const rnd::CurriculumState full = rnd::CurriculumState::full();
    env.reset(rnd::sample_env(cfg.rand, full, teacher.lib, env.rng()),
              rnd::noise_at(cfg.rand, full));
    std::vector<double> trace;
    for (int t = 0; t < 10; ++t) {
      const std::vector<float> enc_in = teacher.encoder.build_input(
          env, cfg.rand.obj_rot_noise_deg, env.rng());
      const std::vector<float> z = teacher.encoder.encode(enc_in);
      std::vector<float> input(env.observation().v.begin(),
                               env.observation().v.end());
      // In the adapter path the estimate slot is filled with the teacher z
      // (oracle mode); both paths must assemble the same policy input.
      const std::vector<float> z_used = via_adapter_path ? z : z;
      input.insert(input.end(), z_used.begin(), z_used.end());
      const std::vector<float> goal = env.goal_vec();
      input.insert(input.end(), goal.begin(), goal.end());
      const auto act = teacher.policy.act(input, env.rng(), true);
      env.step(act.action);
      for (double q : env.state().joint_pos) trace.push_back(q);
      trace.push_back(env.state().object_pose.p.x);
      trace.push_back(env.state().object_pose.p.y);
    }
    return trace;
  };
  CHECK(rollout(false) == rollout(true));
}

TEST_CASE("a few adapter updates reduce the training loss") {
  io::RunConfig cfg = tiny_cfg();
  cfg.adapter.updates = 8;
  cfg.adapter.epochs = 2;
  cfg.adapter.lr = 3e-3;
  Teacher teacher(cfg);
  Phase2Trainer trainer(cfg, &teacher.policy, &teacher.encoder, &teacher.lib,
                        true, 6);
  const auto curve = trainer.run();
  REQUIRE(curve.size() == 8);
  CHECK(curve.back().train_loss < curve.front().train_loss);
}
