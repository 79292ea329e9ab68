#include "planarm/rl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "planarm/rl/gae.hpp"

namespace planarm::rl {

namespace {

// Fixed chunk -> thread assignment; results never depend on the thread
// count because every chunk owns its own output slot.
void parallel_chunks(int n_chunks, int threads,
                     const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n_chunks));
  if (threads == 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int c = t; c < n_chunks; c += threads) fn(c);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::string to_string(TrainVariant v) {
  switch (v) {
    case TrainVariant::teacher: return "teacher";
    case TrainVariant::nooe: return "nooe";
    case TrainVariant::dr: return "dr";
    case TrainVariant::dr_vi: return "dr_vi";
    case TrainVariant::adr: return "adr";
  }
  return "?";
}

TrainVariant train_variant_from_string(const std::string& s) {
  if (s == "teacher") return TrainVariant::teacher;
  if (s == "nooe") return TrainVariant::nooe;
  if (s == "dr") return TrainVariant::dr;
  if (s == "dr_vi") return TrainVariant::dr_vi;
  if (s == "adr") return TrainVariant::adr;
  throw Fault("unknown training variant: " + s);
}

nn::Net<float> make_depth_net(const std::string& name, int rays, int feat,
                              Rng& rng) {
  using nn::Act;
  using nn::LayerSpec;
  std::vector<LayerSpec> layers = {
      LayerSpec::conv1d(16, 8, 4, Act::tanh_),
      LayerSpec::conv1d(feat, 7, 2, Act::tanh_),
  };
  // Final conv collapses whatever length remains to 1.
  const int l1 = (rays - 8) / 4 + 1;
  const int l2 = (l1 - 7) / 2 + 1;
  layers.push_back(LayerSpec::conv1d(feat, l2, 1, Act::tanh_));
  layers.push_back(LayerSpec::flatten());
  nn::Net<float> net(name, nn::Shape{1, rays}, layers);
  net.init_orthogonal(rng, std::sqrt(2.0), std::sqrt(2.0));
  return net;
}

nn::Net<float> make_history_net(const std::string& name, int channels, int len,
                                int feat, Rng& rng) {
  using nn::Act;
  using nn::LayerSpec;
  std::vector<LayerSpec> layers = {
      LayerSpec::conv1d(feat, 5, 2, Act::tanh_),
      LayerSpec::conv1d(feat, 3, 1, Act::tanh_),
      LayerSpec::conv1d(feat, 3, 2, Act::tanh_),
  };
  const int l1 = (len - 5) / 2 + 1;
  const int l2 = l1 - 3 + 1;
  const int l3 = (l2 - 3) / 2 + 1;
  layers.push_back(LayerSpec::conv1d(feat, l3, 1, Act::tanh_));
  layers.push_back(LayerSpec::flatten());
  nn::Net<float> net(name, nn::Shape{channels, len}, layers);
  net.init_orthogonal(rng, std::sqrt(2.0), std::sqrt(2.0));
  return net;
}

struct Phase1Trainer::Sample {
  std::vector<float> obs;        // 17
  std::vector<float> goal;       // task goal vector
  std::vector<float> enc_input;  // teacher/nooe
  std::vector<float> scan;       // dr_vi
  int instance_id = 0;
  int category_id = 0;
  std::vector<float> u;          // pre-squash action
  float logp = 0.0f;
  float value = 0.0f;
  float reward = 0.0f;           // scaled; bootstrap folded in at truncation
  uint8_t done = 0;
  float adv = 0.0f;
  float ret = 0.0f;
};

struct Phase1Trainer::EnvSlot {
  std::unique_ptr<tasks::TaskEnv> env;
  double episode_return = 0.0;  // raw
  rnd::AdrState::BoundaryTag tag;
  std::vector<EpisodeResult> finished;
};

Phase1Trainer::~Phase1Trainer() = default;

Phase1Trainer::Phase1Trainer(const io::RunConfig& cfg, TrainVariant variant,
                             const tasks::ObjectLibrary* library, uint64_t seed)
    : cfg_(cfg),
      variant_(variant),
      library_(library),
      trainer_rng_(Rng::derive(seed, 9001)) {
  spec_ = cfg.rand;
  curriculum_.ramp_updates = cfg.ramp_updates;
  curriculum_.advance(0);
  if (variant == TrainVariant::adr) {
    adr_ = rnd::make_adr(spec_, cfg.adr.init_frac);
    adr_->buffer_size = cfg.adr.buffer_size;
    adr_->sr_hi = cfg.adr.sr_hi;
    adr_->sr_lo = cfg.adr.sr_lo;
    adr_->step_frac = cfg.adr.step_frac;
    adr_->boundary_prob = cfg.adr.boundary_prob;
    curriculum_ = rnd::CurriculumState::full();
  }

  env_cfg_.kind = cfg.task_kind();
  env_cfg_.arm = cfg.arm;
  env_cfg_.depth = cfg.depth;

  Rng init_rng(Rng::derive(seed, 42));
  PolicyConfig pc;
  pc.obs_dim = sense::Observation::kDim;
  pc.goal_dim = tasks::goal_dim(env_cfg_.kind);
  pc.hidden = cfg.net.policy_hidden;
  pc.z_dim = 0;
  pc.extra_dim = 0;
  const bool privileged =
      variant == TrainVariant::teacher || variant == TrainVariant::nooe;
  if (privileged) pc.z_dim = cfg.net.z_dim;
  if (variant == TrainVariant::dr_vi) pc.extra_dim = cfg.net.depth_feature;
  policy_ = std::make_unique<PolicyModel>(pc, init_rng);

  if (privileged) {
    EncoderConfig ec;
    ec.z_dim = cfg.net.z_dim;
    ec.hidden = cfg.net.encoder_hidden;
    ec.use_dictionaries = variant == TrainVariant::teacher;
    encoder_ = std::make_unique<EnvEncoder>(ec, library->size(),
                                            library->num_categories(), init_rng);
  }
  if (variant == TrainVariant::dr_vi) {
    vis_ = std::make_unique<nn::Net<float>>(make_depth_net(
        "psi_vi", cfg.depth.rays, cfg.net.depth_feature, init_rng));
  }

  nn::Adam<float>::Config ac;
  ac.lr = cfg.ppo.lr;
  adam_ = nn::Adam<float>(trainable_blobs(), ac);

  envs_.resize(cfg.ppo.num_envs);
  for (int e = 0; e < cfg.ppo.num_envs; ++e) {
    envs_[e] = std::make_unique<EnvSlot>();
    envs_[e]->env = std::make_unique<tasks::TaskEnv>(
        env_cfg_, library, Rng::derive(seed, 1000 + e));
    reset_env(*envs_[e]);
  }
  samples_.resize(static_cast<size_t>(cfg.ppo.num_envs) * cfg.ppo.horizon);
}

std::vector<nn::Blob<float>*> Phase1Trainer::trainable_blobs() {
  std::vector<nn::Blob<float>*> blobs = policy_->blobs();
  if (encoder_) {
    for (auto* b : encoder_->blobs()) blobs.push_back(b);
  }
  if (vis_) {
    for (auto* b : vis_->blobs()) blobs.push_back(b);
  }
  return blobs;
}

int Phase1Trainer::dyn_dim() const {
  if (encoder_) return encoder_->z_dim();
  if (vis_) return vis_->output_size();
  return 0;
}

std::vector<float> Phase1Trainer::assemble_input(
    const Sample& s, const std::vector<float>& dyn) const {
  // Layout: observation ++ z (teacher) ++ goal ++ depth feature (DR+Vi).
  std::vector<float> in;
  in.reserve(policy_->config().input_dim());
  in.insert(in.end(), s.obs.begin(), s.obs.end());
  if (encoder_) in.insert(in.end(), dyn.begin(), dyn.end());
  in.insert(in.end(), s.goal.begin(), s.goal.end());
  if (vis_) in.insert(in.end(), dyn.begin(), dyn.end());
  return in;
}

void Phase1Trainer::reset_env(EnvSlot& slot) {
  tasks::TaskEnv& env = *slot.env;
  sim::EnvParams params;
  slot.tag = {};
  if (adr_) {
    params = rnd::adr_sample(*adr_, spec_, *library_, env.rng(), &slot.tag);
  } else {
    params = rnd::sample_env(spec_, curriculum_, *library_, env.rng());
  }
  env.reset(params, rnd::noise_at(spec_, curriculum_));
  slot.episode_return = 0.0;
}

void Phase1Trainer::collect_rollout() {
  const int horizon = cfg_.ppo.horizon;
  const int n_envs = cfg_.ppo.num_envs;
  const double rot_noise = curriculum_.ramp * spec_.obj_rot_noise_deg;
  const auto t0 = std::chrono::steady_clock::now();

  parallel_chunks(n_envs, cfg_.ppo.threads, [&](int e) {
    EnvSlot& slot = *envs_[e];
    tasks::TaskEnv& env = *slot.env;
    slot.finished.clear();
    for (int t = 0; t < horizon; ++t) {
      Sample& s = samples_[static_cast<size_t>(e) * horizon + t];
      s.obs.assign(env.observation().v.begin(), env.observation().v.end());
      s.goal = env.goal_vec();
      std::vector<float> dyn;
      if (encoder_) {
        s.enc_input = encoder_->build_input(env, rot_noise, env.rng());
        s.instance_id = env.world().params().instance_id;
        s.category_id = env.world().params().category_id;
        dyn = encoder_->encode(s.enc_input);
      } else if (vis_) {
        s.scan = env.scan().depths;
        nn::Fwd<float> f;
        vis_->forward(s.scan, f);
        dyn = f.out();
      }
      const std::vector<float> input = assemble_input(s, dyn);
      PolicyModel::ActOut act = policy_->act(input, env.rng(), false);
      s.u = act.pre_squash;
      s.logp = static_cast<float>(act.log_prob);
      s.value = static_cast<float>(act.value);

      const tasks::TaskEnv::StepOut out = env.step(act.action);
      slot.episode_return += out.reward;
      s.reward = static_cast<float>(out.reward * cfg_.ppo.reward_scale);
      const bool horizon_end = env.episode_steps() >= horizon;
      s.done = out.success || horizon_end ? 1 : 0;
      if (out.success) {
        slot.finished.push_back({slot.episode_return, true, slot.tag});
        reset_env(slot);
      } else if (horizon_end) {
        // Truncation: bootstrap the tail value through the reward so GAE
        // treats the cut as non-terminal.
        Sample probe;
        probe.obs.assign(env.observation().v.begin(), env.observation().v.end());
        probe.goal = env.goal_vec();
        std::vector<float> pdyn;
        if (encoder_) {
          pdyn = encoder_->encode(encoder_->build_input(env, rot_noise, env.rng()));
        } else if (vis_) {
          nn::Fwd<float> f;
          vis_->forward(env.scan().depths, f);
          pdyn = f.out();
        }
        Rng null_rng(0);
        const double v_next =
            policy_->act(assemble_input(probe, pdyn), null_rng, true).value;
        s.reward += static_cast<float>(cfg_.ppo.gamma * v_next);
        slot.finished.push_back({slot.episode_return, false, slot.tag});
        reset_env(slot);
      }
    }
  });

  step_seconds_ +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  env_steps_ += static_cast<int64_t>(n_envs) * horizon;

  // Merge episode results and ADR credit in fixed env order.
  finished_.clear();
  for (int e = 0; e < n_envs; ++e) {
    for (const EpisodeResult& r : envs_[e]->finished)
      finished_.push_back(r);
  }
  if (adr_) {
    for (const EpisodeResult& r : finished_)
      rnd::adr_update(*adr_, r.tag, r.success);
  }

  // GAE per environment trajectory.
  const double gamma = cfg_.ppo.gamma, lam = cfg_.ppo.lam;
  for (int e = 0; e < n_envs; ++e) {
    std::vector<float> rew(horizon), val(horizon);
    std::vector<uint8_t> done(horizon);
    for (int t = 0; t < horizon; ++t) {
      const Sample& s = samples_[static_cast<size_t>(e) * horizon + t];
      rew[t] = s.reward;
      val[t] = s.value;
      done[t] = s.done;
    }
    // Windows always end on an episode boundary (success or truncation), so
    // no tail bootstrap is needed here.
    const std::vector<float> adv = gae(rew, val, done, 0.0f, gamma, lam);
    for (int t = 0; t < horizon; ++t) {
      Sample& s = samples_[static_cast<size_t>(e) * horizon + t];
      s.adv = adv[t];
      s.ret = adv[t] + s.value;
    }
  }
}

struct Phase1Trainer::GradBundle {
  PolicyModel::Grads pol;
  std::vector<std::vector<float>> enc_w, enc_b;
  std::vector<float> g_inst, g_cat;
  std::vector<std::vector<float>> vis_w, vis_b;
  double kl = 0.0, ent = 0.0, pg = 0.0, vl = 0.0;
  int count = 0;

  void init(Phase1Trainer& tr) {
    tr.policy_->make_grads(pol);
    if (tr.encoder_) {
      tr.encoder_->net().make_grads(enc_w, enc_b);
      g_inst.assign(tr.encoder_->dicts().instance_table.size(), 0.0f);
      g_cat.assign(tr.encoder_->dicts().category_table.size(), 0.0f);
    }
    if (tr.vis_) tr.vis_->make_grads(vis_w, vis_b);
  }
  void zero() {
    auto z = [](std::vector<std::vector<float>>& g) {
      for (auto& v : g) std::fill(v.begin(), v.end(), 0.0f);
    };
    z(pol.trunk_w); z(pol.trunk_b); z(pol.mean_w); z(pol.mean_b);
    z(pol.value_w); z(pol.value_b);
    std::fill(pol.log_std.begin(), pol.log_std.end(), 0.0f);
    std::fill(pol.dinput.begin(), pol.dinput.end(), 0.0f);
    z(enc_w); z(enc_b); z(vis_w); z(vis_b);
    std::fill(g_inst.begin(), g_inst.end(), 0.0f);
    std::fill(g_cat.begin(), g_cat.end(), 0.0f);
    kl = ent = pg = vl = 0.0;
    count = 0;
  }
  void add(const GradBundle& o) {
    auto acc = [](std::vector<std::vector<float>>& a,
                  const std::vector<std::vector<float>>& b) {
      for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
    };
    acc(pol.trunk_w, o.pol.trunk_w); acc(pol.trunk_b, o.pol.trunk_b);
    acc(pol.mean_w, o.pol.mean_w); acc(pol.mean_b, o.pol.mean_b);
    acc(pol.value_w, o.pol.value_w); acc(pol.value_b, o.pol.value_b);
    for (size_t i = 0; i < pol.log_std.size(); ++i)
      pol.log_std[i] += o.pol.log_std[i];
    acc(enc_w, o.enc_w); acc(enc_b, o.enc_b);
    for (size_t i = 0; i < g_inst.size(); ++i) g_inst[i] += o.g_inst[i];
    for (size_t i = 0; i < g_cat.size(); ++i) g_cat[i] += o.g_cat[i];
    acc(vis_w, o.vis_w); acc(vis_b, o.vis_b);
    kl += o.kl; ent += o.ent; pg += o.pg; vl += o.vl; count += o.count;
  }

  // Gradient buffers in the exact order of Phase1Trainer::trainable_blobs().
  std::vector<std::vector<float>*> ordered(Phase1Trainer& tr) {
    std::vector<std::vector<float>*> out;
    auto push_net = [&](const nn::Net<float>& net,
                        std::vector<std::vector<float>>& gw,
                        std::vector<std::vector<float>>& gb) {
      const auto& layers = net.layers();
      for (size_t li = 0; li < layers.size(); ++li) {
        if (layers[li].kind == nn::LayerSpec::Kind::flatten) continue;
        out.push_back(&gw[li]);
        out.push_back(&gb[li]);
      }
    };
    push_net(tr.policy_->trunk(), pol.trunk_w, pol.trunk_b);
    push_net(tr.policy_->mean_head(), pol.mean_w, pol.mean_b);
    push_net(tr.policy_->value_head(), pol.value_w, pol.value_b);
    out.push_back(&pol.log_std);
    if (tr.encoder_) {
      push_net(tr.encoder_->net(), enc_w, enc_b);
      out.push_back(&g_inst);
      out.push_back(&g_cat);
    }
    if (tr.vis_) push_net(*tr.vis_, vis_w, vis_b);
    return out;
  }
};

UpdateStats Phase1Trainer::optimize() {
  const int n = static_cast<int>(samples_.size());
  const int act_dim = policy_->config().act_dim;
  const int obs_dim = policy_->config().obs_dim;
  const int z_dim = policy_->config().z_dim;

  // Advantage normalization over the whole batch.
  double mean = 0.0;
  for (const Sample& s : samples_) mean += s.adv;
  mean /= n;
  double var = 0.0;
  for (const Sample& s : samples_) var += (s.adv - mean) * (s.adv - mean);
  const double std = std::sqrt(var / n) + 1e-8;
  for (Sample& s : samples_) s.adv = static_cast<float>((s.adv - mean) / std);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int n_chunks = std::max(1, cfg_.ppo.grad_chunks);
  std::vector<GradBundle> bundles(n_chunks);
  for (auto& b : bundles) b.init(*this);

  UpdateStats stats;
  stats.update = update_idx_;
  double kl_total = 0.0, ent_total = 0.0, pg_total = 0.0, vl_total = 0.0;
  int mb_count = 0;
  bool aborted = false;

  for (int epoch = 0; epoch < cfg_.ppo.epochs && !aborted; ++epoch) {
    // Deterministic Fisher-Yates shuffle from the trainer stream.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(trainer_rng_.uniform_int(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_kl = 0.0;
    int epoch_mbs = 0;
    for (int start = 0; start < n; start += cfg_.ppo.minibatch) {
      const int count = std::min(cfg_.ppo.minibatch, n - start);
      const int per_chunk = (count + n_chunks - 1) / n_chunks;
      for (auto& b : bundles) b.zero();

      parallel_chunks(n_chunks, cfg_.ppo.threads, [&](int c) {
        GradBundle& g = bundles[c];
        const int lo = start + c * per_chunk;
        const int hi = std::min(start + count, lo + per_chunk);
        PolicyModel::Caches caches;
        for (int idx = lo; idx < hi; ++idx) {
          const Sample& s = samples_[order[idx]];
          std::vector<float> dyn;
          nn::Fwd<float> enc_fwd, vis_fwd;
          if (encoder_) {
            encoder_->forward(s.enc_input, enc_fwd);
            dyn = enc_fwd.out();
          } else if (vis_) {
            vis_->forward(s.scan, vis_fwd);
            dyn = vis_fwd.out();
          }
          const std::vector<float> input = assemble_input(s, dyn);
          const PolicyModel::Eval ev = policy_->eval_action(input, s.u, caches);

          const double logratio = ev.log_prob - s.logp;
          const double ratio = std::exp(logratio);
          const double adv = s.adv;
          const double clip = cfg_.ppo.clip;
          g.kl += (ratio - 1.0) - logratio;
          g.ent += ev.entropy;

          // Clipped surrogate: gradient flows only through the unclipped
          // branch when it is the active minimum.
          const double surr1 = ratio * adv;
          const double surr2 =
              std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
          const bool unclipped_active = surr1 <= surr2;
          g.pg += -std::min(surr1, surr2);

          double dlogp = 0.0;
          if (unclipped_active) dlogp = -adv * ratio;

          // Entropy bonus: d entropy / d log_std = 1.
          const double dvalue =
              cfg_.ppo.vf_coef * (ev.value - s.ret);
          g.vl += 0.5 * (ev.value - s.ret) * (ev.value - s.ret);

          std::vector<float> dmean(act_dim, 0.0f);
          std::vector<float> dlog_std(act_dim, 0.0f);
          for (int i = 0; i < act_dim; ++i) {
            const double logstd = policy_->log_std().val[i];
            const double sd = std::exp(logstd);
            const double zn = (s.u[i] - caches.mean_out[i]) / sd;
            // d logp / d mean = zn / sd ; d logp / d logstd = zn^2 - 1
            dmean[i] = static_cast<float>(dlogp * zn / sd);
            dlog_std[i] = static_cast<float>(dlogp * (zn * zn - 1.0) -
                                             cfg_.ppo.ent_coef);
          }
          policy_->backward(input, caches, dmean, dlog_std, dvalue, g.pol);
          if (encoder_) {
            std::vector<float> dz(g.pol.dinput.begin() + obs_dim,
                                  g.pol.dinput.begin() + obs_dim + z_dim);
            encoder_->backward(s.enc_input, enc_fwd, dz, s.instance_id,
                               s.category_id, g.enc_w, g.enc_b, g.g_inst,
                               g.g_cat);
          } else if (vis_) {
            const int in_dim = policy_->config().input_dim();
            const int feat = vis_->output_size();
            std::vector<float> df(g.pol.dinput.begin() + in_dim - feat,
                                  g.pol.dinput.begin() + in_dim);
            vis_->backward(s.scan, vis_fwd, df, g.vis_w, g.vis_b, nullptr);
          }
          std::fill(g.pol.dinput.begin(), g.pol.dinput.end(), 0.0f);
          g.count += 1;
        }
      });

      for (int c = 1; c < n_chunks; ++c) bundles[0].add(bundles[c]);
      GradBundle& g = bundles[0];
      const float inv = 1.0f / static_cast<float>(count);
      std::vector<std::vector<float>*> grads = g.ordered(*this);
      double norm2 = 0.0;
      for (auto* gv : grads) {
        for (float& x : *gv) {
          x *= inv;
          norm2 += static_cast<double>(x) * x;
        }
      }
      const double norm = std::sqrt(norm2);
      if (cfg_.ppo.max_grad_norm > 0.0 && norm > cfg_.ppo.max_grad_norm) {
        const float scale = static_cast<float>(cfg_.ppo.max_grad_norm / norm);
        for (auto* gv : grads)
          for (float& x : *gv) x *= scale;
      }
      std::vector<const std::vector<float>*> views(grads.begin(), grads.end());
      adam_.step(views);

      kl_total += g.kl / count;
      ent_total += g.ent / count;
      pg_total += g.pg / count;
      vl_total += g.vl / count;
      epoch_kl += g.kl / count;
      ++mb_count;
      ++epoch_mbs;
    }
    if (epoch_mbs > 0 && epoch_kl / epoch_mbs > cfg_.ppo.kl_abort) {
      aborted = true;  // KL explosion guard
    }
  }

  if (mb_count > 0) {
    stats.approx_kl = kl_total / mb_count;
    stats.entropy = ent_total / mb_count;
    stats.pg_loss = pg_total / mb_count;
    stats.v_loss = vl_total / mb_count;
  }
  return stats;
}

UpdateStats Phase1Trainer::run_one_update() {
  curriculum_.advance(update_idx_);
  collect_rollout();
  UpdateStats stats = optimize();
  stats.update = update_idx_;
  stats.env_steps = env_steps_;
  stats.episodes = static_cast<int>(finished_.size());
  stats.ramp = curriculum_.ramp;
  if (!finished_.empty()) {
    double ret = 0.0, sr = 0.0;
    for (const EpisodeResult& r : finished_) {
      ret += r.raw_return;
      sr += r.success ? 1.0 : 0.0;
    }
    stats.mean_return = ret / finished_.size();
    stats.success_rate = sr / finished_.size();
  }
  ++update_idx_;
  return stats;
}

void Phase1Trainer::run(io::MetricsWriter* metrics,
                        const std::function<void(const UpdateStats&)>& cb) {
  for (int u = update_idx_; u < cfg_.ppo.updates; ++u) {
    UpdateStats stats = run_one_update();
    if (metrics) {
      nlohmann::json j{{"record", "update"},
                       {"variant", to_string(variant_)},
                       {"update", stats.update},
                       {"env_steps", stats.env_steps},
                       {"episodes", stats.episodes},
                       {"mean_return", stats.mean_return},
                       {"success_rate", stats.success_rate},
                       {"entropy", stats.entropy},
                       {"approx_kl", stats.approx_kl},
                       {"pg_loss", stats.pg_loss},
                       {"v_loss", stats.v_loss},
                       {"ramp", stats.ramp}};
      if (adr_) {
        nlohmann::json ranges = nlohmann::json::array();
        for (const auto& p : adr_->params) {
          ranges.push_back({{"name", p.name},
                            {"lo", p.current.lo},
                            {"hi", p.current.hi}});
        }
        j["adr_ranges"] = ranges;
      }
      metrics->row(j);
    }
    if (cb) cb(stats);
  }
}

io::Checkpoint Phase1Trainer::make_checkpoint() const {
  auto* self = const_cast<Phase1Trainer*>(this);
  io::Checkpoint ck =
      io::Checkpoint::capture("phase1:" + to_string(variant_), cfg_.digest(),
                              self->trainable_blobs());
  const auto params = self->trainable_blobs();
  auto& m = const_cast<nn::Adam<float>&>(adam_).moments_m();
  auto& v = const_cast<nn::Adam<float>&>(adam_).moments_v();
  for (size_t i = 0; i < params.size(); ++i) {
    nn::Blob<float> bm, bv;
    bm.name = "adam.m." + params[i]->name;
    bm.shape = params[i]->shape;
    bm.val = m[i];
    bv.name = "adam.v." + params[i]->name;
    bv.shape = params[i]->shape;
    bv.val = v[i];
    ck.arrays.push_back(std::move(bm));
    ck.arrays.push_back(std::move(bv));
  }
  ck.step_count = adam_.step_count();
  return ck;
}

void Phase1Trainer::restore(const io::Checkpoint& ck) {
  auto blobs = trainable_blobs();
  ck.restore_into(blobs);
  auto& m = adam_.moments_m();
  auto& v = adam_.moments_v();
  for (size_t i = 0; i < blobs.size(); ++i) {
    const nn::Blob<float>* bm = ck.find("adam.m." + blobs[i]->name);
    const nn::Blob<float>* bv = ck.find("adam.v." + blobs[i]->name);
    if (bm && bv) {
      m[i] = bm->val;
      v[i] = bv->val;
    }
  }
  adam_.set_step_count(ck.step_count);
}

}  // namespace planarm::rl
