#include "planarm/rl/model.hpp"

#include <cmath>

#include "planarm/eval/audit.hpp"

namespace planarm::rl {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
}

EnvEncoder::EnvEncoder(const EncoderConfig& cfg, int num_instances,
                       int num_categories, Rng& rng)
    : cfg_(cfg) {
  using nn::Act;
  using nn::LayerSpec;
  net_ = nn::Net<float>(
      "mu", nn::Shape{1, kEncoderInputDim},
      {LayerSpec::dense(cfg.hidden, Act::tanh_),
       LayerSpec::dense(cfg.hidden, Act::tanh_),
       LayerSpec::dense(cfg.z_dim, Act::linear)});
  net_.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  dicts_.init(num_instances, num_categories, rng);
}

std::vector<float> EnvEncoder::build_input(const tasks::TaskEnv& env,
                                           double rot_noise_deg,
                                           Rng& rng) const {
  eval::PrivilegedAudit::note_read();
  const sim::EnvParams& p = env.world().params();
  const sim::SimState& s = env.state();
  std::vector<float> in(kEncoderInputDim, 0.0f);
  in[0] = static_cast<float>(p.scale_mult);
  in[1] = static_cast<float>(p.density_mult);
  in[2] = static_cast<float>(p.friction);
  in[3] = static_cast<float>(p.force_scale);
  in[4] = static_cast<float>(p.disturb_prob);
  in[5] = static_cast<float>(env.world().object_mass());
  in[6] = static_cast<float>(p.task_slot[0]);
  in[7] = static_cast<float>(p.task_slot[1]);
  if (cfg_.use_dictionaries) {
    const float* u = dicts_.instance_table.val.data() +
                     static_cast<size_t>(p.instance_id) * kDictDim;
    const float* c = dicts_.category_table.val.data() +
                     static_cast<size_t>(p.category_id) * kDictDim;
    if (p.instance_id < 0 || p.instance_id >= dicts_.num_instances())
      throw Fault("EnvEncoder: unknown instance id");
    if (p.category_id < 0 || p.category_id >= dicts_.num_categories())
      throw Fault("EnvEncoder: unknown category id");
    for (int i = 0; i < kDictDim; ++i) in[kEPhysDim + i] = u[i];
    for (int i = 0; i < kDictDim; ++i) in[kEPhysDim + kDictDim + i] = c[i];
  }
  const double rot = s.object_pose.theta +
                     rng.uniform(-rot_noise_deg, rot_noise_deg) * M_PI / 180.0;
  const int base = kEPhysDim + 2 * kDictDim;
  in[base + 0] = static_cast<float>(std::cos(rot));
  in[base + 1] = static_cast<float>(std::sin(rot));
  in[base + 2] = s.finger_contact[0] ? 1.0f : 0.0f;
  in[base + 3] = s.finger_contact[1] ? 1.0f : 0.0f;
  return in;
}

std::vector<float> EnvEncoder::encode(const std::vector<float>& input) const {
  nn::Fwd<float> f;
  net_.forward(input, f);
  return f.out();
}

void EnvEncoder::forward(const std::vector<float>& input,
                         nn::Fwd<float>& f) const {
  net_.forward(input, f);
}

void EnvEncoder::backward(const std::vector<float>& input,
                          const nn::Fwd<float>& f, const std::vector<float>& dz,
                          int instance_id, int category_id,
                          std::vector<std::vector<float>>& gw,
                          std::vector<std::vector<float>>& gb,
                          std::vector<float>& g_instance_table,
                          std::vector<float>& g_category_table) const {
  std::vector<float> din;
  net_.backward(input, f, dz, gw, gb, &din);
  if (!cfg_.use_dictionaries) return;
  float* gu = g_instance_table.data() + static_cast<size_t>(instance_id) * kDictDim;
  float* gc = g_category_table.data() + static_cast<size_t>(category_id) * kDictDim;
  for (int i = 0; i < kDictDim; ++i) {
    gu[i] += din[kEPhysDim + i];
    gc[i] += din[kEPhysDim + kDictDim + i];
  }
}

PolicyModel::PolicyModel(const PolicyConfig& cfg, Rng& rng) : cfg_(cfg) {
  using nn::Act;
  using nn::LayerSpec;
  trunk_ = nn::Net<float>(
      "pi.trunk", nn::Shape{1, cfg.input_dim()},
      {LayerSpec::dense(cfg.hidden, Act::tanh_),
       LayerSpec::dense(cfg.hidden, Act::tanh_),
       LayerSpec::dense(cfg.hidden, Act::tanh_)});
  mean_head_ = nn::Net<float>("pi.mean", nn::Shape{1, cfg.hidden},
                              {LayerSpec::dense(cfg.act_dim, Act::linear)});
  value_head_ = nn::Net<float>("pi.value", nn::Shape{1, cfg.hidden},
                               {LayerSpec::dense(1, Act::linear)});
  trunk_.init_orthogonal(rng, std::sqrt(2.0), std::sqrt(2.0));
  mean_head_.init_orthogonal(rng, 0.01, 0.01);
  value_head_.init_orthogonal(rng, 1.0, 1.0);
  log_std_.name = "pi.log_std";
  log_std_.shape = {cfg.act_dim};
  log_std_.val.assign(cfg.act_dim, static_cast<float>(cfg.init_log_std));
}

PolicyModel::ActOut PolicyModel::act(const std::vector<float>& input, Rng& rng,
                                     bool deterministic) const {
  nn::Fwd<float> ft, fm, fv;
  trunk_.forward(input, ft);
  mean_head_.forward(ft.out(), fm);
  value_head_.forward(ft.out(), fv);
  ActOut out;
  out.value = fv.out()[0];
  out.pre_squash.resize(cfg_.act_dim);
  out.action.resize(cfg_.act_dim);
  out.log_prob = 0.0;
  for (int i = 0; i < cfg_.act_dim; ++i) {
    const double mean = fm.out()[i];
    const double std = std::exp(static_cast<double>(log_std_.val[i]));
    const double u = deterministic ? mean : mean + std * rng.normal();
    out.pre_squash[i] = static_cast<float>(u);
    const double a = std::tanh(u);
    out.action[i] = a;
    const double zn = (u - mean) / std;
    out.log_prob += -0.5 * zn * zn - std::log(std) - kLogSqrt2Pi -
                    std::log(1.0 - a * a + 1e-6);
  }
  return out;
}

PolicyModel::Eval PolicyModel::eval_action(const std::vector<float>& input,
                                           const std::vector<float>& pre_squash,
                                           Caches& c) const {
  trunk_.forward(input, c.trunk);
  mean_head_.forward(c.trunk.out(), c.mean);
  value_head_.forward(c.trunk.out(), c.value);
  c.mean_out = c.mean.out();
  Eval e;
  e.value = c.value.out()[0];
  for (int i = 0; i < cfg_.act_dim; ++i) {
    const double mean = c.mean_out[i];
    const double logstd = log_std_.val[i];
    const double std = std::exp(logstd);
    const double u = pre_squash[i];
    const double a = std::tanh(u);
    const double zn = (u - mean) / std;
    e.log_prob += -0.5 * zn * zn - logstd - kLogSqrt2Pi -
                  std::log(1.0 - a * a + 1e-6);
    e.entropy += logstd + 0.5 * std::log(2.0 * M_PI * M_E);
  }
  return e;
}

void PolicyModel::make_grads(Grads& g) const {
  trunk_.make_grads(g.trunk_w, g.trunk_b);
  mean_head_.make_grads(g.mean_w, g.mean_b);
  value_head_.make_grads(g.value_w, g.value_b);
  g.log_std.assign(cfg_.act_dim, 0.0f);
  g.dinput.assign(cfg_.input_dim(), 0.0f);
}

void PolicyModel::backward(const std::vector<float>& input, const Caches& c,
                           const std::vector<float>& dmean,
                           const std::vector<float>& dlog_std, double dvalue,
                           Grads& g) const {
  for (int i = 0; i < cfg_.act_dim; ++i) g.log_std[i] += dlog_std[i];
  std::vector<float> dh(cfg_.hidden, 0.0f);
  std::vector<float> dtmp;
  mean_head_.backward(c.trunk.out(), c.mean, dmean, g.mean_w, g.mean_b, &dtmp);
  for (int i = 0; i < cfg_.hidden; ++i) dh[i] += dtmp[i];
  const std::vector<float> dv{static_cast<float>(dvalue)};
  value_head_.backward(c.trunk.out(), c.value, dv, g.value_w, g.value_b, &dtmp);
  for (int i = 0; i < cfg_.hidden; ++i) dh[i] += dtmp[i];
  std::vector<float> din;
  trunk_.backward(input, c.trunk, dh, g.trunk_w, g.trunk_b, &din);
  for (int i = 0; i < cfg_.input_dim(); ++i) g.dinput[i] += din[i];
}

}  // namespace planarm::rl
