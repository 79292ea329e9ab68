#include "planarm/adapt/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace planarm::adapt {

AdapterNets::AdapterNets(const io::RunConfig& cfg, int z_dim, Rng& rng) {
  using nn::Act;
  using nn::LayerSpec;
  psi = rl::make_depth_net("psi", cfg.depth.rays, cfg.net.depth_feature, rng);
  history = rl::make_history_net(
      "hist", sense::Observation::kDim + cfg.arm.num_joints + 1,
      cfg.net.history_len, cfg.net.history_feature, rng);
  const int in = cfg.net.depth_feature + cfg.net.history_feature;
  phi = nn::Net<float>("phi", nn::Shape{1, in},
                       {LayerSpec::dense(64, Act::tanh_),
                        LayerSpec::dense(z_dim, Act::linear)});
  phi.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  if (phi.output_size() != z_dim)
    throw Fault("AdapterNets: phi output must match the teacher z dimension");
}

std::vector<float> adapt_predict(const AdapterNets& nets,
                                 const HistoryBuffer& history,
                                 const std::vector<float>& scan,
                                 bool use_vision) {
  nn::Fwd<float> fh, fp, fo;
  nets.history.forward(history.channels(), fh);
  std::vector<float> joint(nets.phi.input_size(), 0.0f);
  const int hf = nets.history.output_size();
  for (int i = 0; i < hf; ++i) joint[i] = fh.out()[i];
  if (use_vision) {
    nets.psi.forward(scan, fp);
    for (int i = 0; i < nets.psi.output_size(); ++i)
      joint[hf + i] = fp.out()[i];
  }
  nets.phi.forward(joint, fo);
  return fo.out();
}

Phase2Trainer::Phase2Trainer(const io::RunConfig& cfg,
                             const rl::PolicyModel* frozen_policy,
                             const rl::EnvEncoder* frozen_encoder,
                             const tasks::ObjectLibrary* library,
                             bool use_vision, uint64_t seed)
    : cfg_(cfg),
      policy_(frozen_policy),
      encoder_(frozen_encoder),
      library_(library),
      use_vision_(use_vision),
      seed_(seed) {
  if (!policy_ || !encoder_) throw Fault("Phase2Trainer: missing frozen teacher");
  if (policy_->config().z_dim != encoder_->z_dim())
    throw Fault("Phase2Trainer: policy/encoder z dimension mismatch");
  env_cfg_.kind = cfg.task_kind();
  env_cfg_.arm = cfg.arm;
  env_cfg_.depth = cfg.depth;
  spec_ = cfg.rand;
  Rng init_rng(Rng::derive(seed, 77));
  nets_ = AdapterNets(cfg, encoder_->z_dim(), init_rng);
  nn::Adam<float>::Config ac;
  ac.lr = cfg.adapter.lr;
  adam_ = nn::Adam<float>(nets_.blobs(), ac);
}

struct Phase2Trainer::Slot {
  std::unique_ptr<tasks::TaskEnv> env;
  std::unique_ptr<HistoryBuffer> hist;
  std::vector<Record> local;
  double loss_sum = 0.0;
  int loss_count = 0;
};

// Collects student-in-the-loop rollouts; returns the mean regression loss of
// the current adapter over the collected steps (no parameter updates here).
double Phase2Trainer::rollout_and_collect(std::vector<Slot>& slots, int steps,
                                          bool collect, Rng&) {
  const rnd::CurriculumState full = rnd::CurriculumState::full();
  const int act_dim = cfg_.arm.num_joints + 1;

  auto reset_slot = [&](Slot& s) {
    const sim::EnvParams p =
        rnd::sample_env(spec_, full, *library_, s.env->rng());
    s.env->reset(p, rnd::noise_at(spec_, full));
    s.hist->clear();
  };

  const int threads = std::max(1, cfg_.ppo.threads);
  std::vector<std::thread> pool;
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Slot& slot = slots[i];
      tasks::TaskEnv& env = *slot.env;
      reset_slot(slot);
      for (int t = 0; t < steps; ++t) {
        const std::vector<float> scan = env.scan().depths;
        const std::vector<float> z_hat =
            adapt_predict(nets_, *slot.hist, scan, use_vision_);
        std::vector<float> obs(env.observation().v.begin(),
                               env.observation().v.end());
        const std::vector<float> goal = env.goal_vec();
        std::vector<float> input;
        input.reserve(policy_->config().input_dim());
        input.insert(input.end(), obs.begin(), obs.end());
        input.insert(input.end(), z_hat.begin(), z_hat.end());
        input.insert(input.end(), goal.begin(), goal.end());

        // Teacher target from privileged inputs (frozen encoder).
        const std::vector<float> enc_in = encoder_->build_input(
            env, spec_.obj_rot_noise_deg, env.rng());
        const std::vector<float> z = encoder_->encode(enc_in);

        double l = 0.0;
        for (size_t k = 0; k < z.size(); ++k) {
          const double d = static_cast<double>(z[k]) - z_hat[k];
          l += d * d;
        }
        slot.loss_sum += l;
        slot.loss_count += 1;
        if (collect) slot.local.push_back({slot.hist->channels(), scan, z});

        // Deterministic policy action plus small exploration noise so
        // contact events stay diverse.
        rl::PolicyModel::ActOut act = policy_->act(input, env.rng(), true);
        std::vector<float> act_f(act_dim);
        if (cfg_.adapter.explore_std > 0.0) {
          for (int a = 0; a < act_dim; ++a) {
            const double u = act.pre_squash[a] +
                             env.rng().normal(0.0, cfg_.adapter.explore_std);
            act.action[a] = std::tanh(u);
          }
        }
        for (int a = 0; a < act_dim; ++a)
          act_f[a] = static_cast<float>(act.action[a]);

        const tasks::TaskEnv::StepOut out = env.step(act.action);
        slot.hist->push(obs, act_f);
        if (out.success || env.episode_steps() >= cfg_.ppo.horizon) {
          reset_slot(slot);
        }
      }
    }
  };
  if (threads == 1 || slots.size() == 1) {
    work(0, slots.size());
  } else {
    const size_t per = (slots.size() + threads - 1) / threads;
    for (int th = 0; th < threads; ++th) {
      const size_t lo = th * per;
      const size_t hi = std::min(slots.size(), lo + per);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  double loss = 0.0;
  int count = 0;
  for (Slot& s : slots) {
    loss += s.loss_sum;
    count += s.loss_count;
    s.loss_sum = 0.0;
    s.loss_count = 0;
  }
  return count > 0 ? loss / count : 0.0;
}

double Phase2Trainer::validation_loss() {
  // Fresh environments on a held-out seed stream; loss only, no collection.
  std::vector<Slot> slots(cfg_.adapter.val_episodes);
  for (size_t i = 0; i < slots.size(); ++i) {
    slots[i].env = std::make_unique<tasks::TaskEnv>(
        env_cfg_, library_, Rng::derive(seed_, 555000 + i));
    slots[i].hist = std::make_unique<HistoryBuffer>(
        sense::Observation::kDim, cfg_.arm.num_joints + 1, cfg_.net.history_len);
  }
  Rng tmp(0);
  return rollout_and_collect(slots, cfg_.ppo.horizon, false, tmp);
}

double Phase2Trainer::initial_val_loss() { return validation_loss(); }

std::vector<AdapterLossPoint> Phase2Trainer::run(io::MetricsWriter* metrics) {
  std::vector<Slot> slots(cfg_.ppo.num_envs);
  for (size_t i = 0; i < slots.size(); ++i) {
    slots[i].env = std::make_unique<tasks::TaskEnv>(
        env_cfg_, library_, Rng::derive(seed_, 444000 + i));
    slots[i].hist = std::make_unique<HistoryBuffer>(
        sense::Observation::kDim, cfg_.arm.num_joints + 1, cfg_.net.history_len);
  }
  Rng shuffle_rng(Rng::derive(seed_, 888));
  std::vector<AdapterLossPoint> curve;

  std::vector<std::vector<float>> psi_w, psi_b, hist_w, hist_b, phi_w, phi_b;
  nets_.psi.make_grads(psi_w, psi_b);
  nets_.history.make_grads(hist_w, hist_b);
  nets_.phi.make_grads(phi_w, phi_b);
  auto zero_all = [&] {
    for (auto* g : {&psi_w, &psi_b, &hist_w, &hist_b, &phi_w, &phi_b}) {
      for (auto& v : *g) std::fill(v.begin(), v.end(), 0.0f);
    }
  };
  // Gradient views matching nets_.blobs() order (psi, history, phi).
  std::vector<const std::vector<float>*> views;
  auto push_views = [&](const nn::Net<float>& net,
                        std::vector<std::vector<float>>& gw,
                        std::vector<std::vector<float>>& gb) {
    const auto& layers = net.layers();
    for (size_t li = 0; li < layers.size(); ++li) {
      if (layers[li].kind == nn::LayerSpec::Kind::flatten) continue;
      views.push_back(&gw[li]);
      views.push_back(&gb[li]);
    }
  };
  push_views(nets_.psi, psi_w, psi_b);
  push_views(nets_.history, hist_w, hist_b);
  push_views(nets_.phi, phi_w, phi_b);

  for (int update = 0; update < cfg_.adapter.updates; ++update) {
    records_.clear();
    const double rollout_loss =
        rollout_and_collect(slots, cfg_.ppo.horizon, true, shuffle_rng);
    for (Slot& s : slots) {
      for (Record& r : s.local) records_.push_back(std::move(r));
      s.local.clear();
    }

    // Minibatch regression epochs over the fresh on-policy batch.
    std::vector<int> order(records_.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg_.adapter.epochs; ++epoch) {
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(shuffle_rng.uniform_int(i + 1));
        std::swap(order[i], order[j]);
      }
      for (size_t start = 0; start < order.size();
           start += cfg_.adapter.minibatch) {
        const size_t end =
            std::min(order.size(), start + static_cast<size_t>(cfg_.adapter.minibatch));
        zero_all();
        const float inv = 1.0f / static_cast<float>(end - start);
        const int hf = nets_.history.output_size();
        for (size_t oi = start; oi < end; ++oi) {
          const Record& r = records_[order[oi]];
          nn::Fwd<float> fh, fp, fo;
          nets_.history.forward(r.hist, fh);
          std::vector<float> joint(nets_.phi.input_size(), 0.0f);
          for (int k = 0; k < hf; ++k) joint[k] = fh.out()[k];
          if (use_vision_) {
            nets_.psi.forward(r.scan, fp);
            for (int k = 0; k < nets_.psi.output_size(); ++k)
              joint[hf + k] = fp.out()[k];
          }
          nets_.phi.forward(joint, fo);
          std::vector<float> dout(fo.out().size());
          for (size_t k = 0; k < dout.size(); ++k) {
            dout[k] = 2.0f * (fo.out()[k] - r.z[k]) * inv;
          }
          std::vector<float> djoint;
          nets_.phi.backward(joint, fo, dout, phi_w, phi_b, &djoint);
          const std::vector<float> dhist(djoint.begin(), djoint.begin() + hf);
          nets_.history.backward(r.hist, fh, dhist, hist_w, hist_b, nullptr);
          if (use_vision_) {
            const std::vector<float> df(djoint.begin() + hf, djoint.end());
            nets_.psi.backward(r.scan, fp, df, psi_w, psi_b, nullptr);
          }
        }
        adam_.step(views);
      }
    }

    AdapterLossPoint point{update, rollout_loss, -1.0};
    if (cfg_.adapter.val_every > 0 &&
        (update % cfg_.adapter.val_every == 0 ||
         update + 1 == cfg_.adapter.updates)) {
      point.val_loss = validation_loss();
    }
    if (metrics) {
      metrics->row({{"record", "adapter_update"},
                    {"update", update},
                    {"train_loss", point.train_loss},
                    {"val_loss", point.val_loss}});
    }
    curve.push_back(point);
  }
  return curve;
}

io::Checkpoint Phase2Trainer::make_checkpoint(
    const std::string& teacher_digest) const {
  auto* self = const_cast<Phase2Trainer*>(this);
  io::Checkpoint ck = io::Checkpoint::capture(
      use_vision_ ? "phase2:rma2" : "phase2:nova", cfg_.digest(),
      self->nets_.blobs());
  ck.teacher_digest = teacher_digest;
  ck.step_count = adam_.step_count();
  return ck;
}

}  // namespace planarm::adapt
