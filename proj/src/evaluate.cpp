#include "planarm/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "planarm/eval/audit.hpp"

namespace planarm::eval {

std::string to_string(AgentVariant v) {
  switch (v) {
    case AgentVariant::oracle: return "oracle";
    case AgentVariant::rma2: return "rma2";
    case AgentVariant::nova: return "nova";
    case AgentVariant::nooe: return "nooe";
    case AgentVariant::dr: return "dr";
    case AgentVariant::dr_vi: return "dr_vi";
    case AgentVariant::adr: return "adr";
  }
  return "?";
}

AgentVariant agent_from_string(const std::string& s) {
  for (AgentVariant v :
       {AgentVariant::oracle, AgentVariant::rma2, AgentVariant::nova,
        AgentVariant::nooe, AgentVariant::dr, AgentVariant::dr_vi,
        AgentVariant::adr}) {
    if (to_string(v) == s) return v;
  }
  throw Fault("unknown agent variant: " + s);
}

bool is_deployable(AgentVariant v) { return v != AgentVariant::oracle; }

namespace {

bool uses_encoder(AgentVariant v) {
  return v == AgentVariant::oracle || v == AgentVariant::rma2 ||
         v == AgentVariant::nova || v == AgentVariant::nooe;
}
bool uses_adapter(AgentVariant v) {
  return v == AgentVariant::rma2 || v == AgentVariant::nova ||
         v == AgentVariant::nooe;
}

}  // namespace

Agent::Agent(AgentVariant variant, const io::RunConfig& cfg,
             const tasks::ObjectLibrary* train_library, uint64_t init_seed)
    : variant_(variant), cfg_(cfg) {
  Rng rng(Rng::derive(init_seed, 4242));
  rl::PolicyConfig pc;
  pc.obs_dim = sense::Observation::kDim;
  pc.goal_dim = tasks::goal_dim(cfg.task_kind());
  pc.hidden = cfg.net.policy_hidden;
  pc.z_dim = uses_encoder(variant) ? cfg.net.z_dim : 0;
  pc.extra_dim = variant == AgentVariant::dr_vi ? cfg.net.depth_feature : 0;
  policy_ = std::make_unique<rl::PolicyModel>(pc, rng);

  if (uses_encoder(variant)) {
    rl::EncoderConfig ec;
    ec.z_dim = cfg.net.z_dim;
    ec.hidden = cfg.net.encoder_hidden;
    ec.use_dictionaries = variant != AgentVariant::nooe;
    encoder_ = std::make_unique<rl::EnvEncoder>(
        ec, train_library->size(), train_library->num_categories(), rng);
  }
  if (uses_adapter(variant)) {
    adapter_.emplace(cfg, cfg.net.z_dim, rng);
    history_ = std::make_unique<adapt::HistoryBuffer>(
        sense::Observation::kDim, cfg.arm.num_joints + 1, cfg.net.history_len);
  }
  if (variant == AgentVariant::dr_vi) {
    vis_ = std::make_unique<nn::Net<float>>(rl::make_depth_net(
        "psi_vi", cfg.depth.rays, cfg.net.depth_feature, rng));
  }
}

void Agent::load(const io::Checkpoint& policy_ck,
                 const io::Checkpoint* adapter_ck) {
  std::vector<nn::Blob<float>*> blobs = policy_->blobs();
  if (encoder_) {
    for (auto* b : encoder_->blobs()) blobs.push_back(b);
  }
  if (vis_) {
    for (auto* b : vis_->blobs()) blobs.push_back(b);
  }
  policy_ck.restore_into(blobs);
  if (uses_adapter(variant_)) {
    if (!adapter_ck)
      throw Fault("agent " + to_string(variant_) + " requires a phase-2 checkpoint");
    if (adapter_ck->teacher_digest != policy_ck.payload_digest())
      throw Fault("phase-2 checkpoint was trained against a different "
                  "phase-1 checkpoint (teacher digest mismatch)");
    adapter_ck->restore_into(adapter_->blobs());
  }
}

void Agent::begin_episode() {
  if (history_) history_->clear();
}

std::vector<double> Agent::act(tasks::TaskEnv& env, double rot_noise_deg) {
  const auto& obs_arr = env.observation().v;
  std::vector<float> obs(obs_arr.begin(), obs_arr.end());
  const std::vector<float> goal = env.goal_vec();
  std::vector<float> input;
  input.reserve(policy_->config().input_dim());
  input.insert(input.end(), obs.begin(), obs.end());
  switch (variant_) {
    case AgentVariant::oracle: {
      const std::vector<float> enc_in =
          encoder_->build_input(env, rot_noise_deg, env.rng());
      const std::vector<float> z = encoder_->encode(enc_in);
      input.insert(input.end(), z.begin(), z.end());
      break;
    }
    case AgentVariant::rma2:
    case AgentVariant::nova:
    case AgentVariant::nooe: {
      const std::vector<float> scan = env.scan().depths;
      const std::vector<float> z_hat = adapt::adapt_predict(
          *adapter_, *history_, scan, variant_ != AgentVariant::nova);
      input.insert(input.end(), z_hat.begin(), z_hat.end());
      break;
    }
    default:
      break;
  }
  input.insert(input.end(), goal.begin(), goal.end());
  if (variant_ == AgentVariant::dr_vi) {
    nn::Fwd<float> f;
    vis_->forward(env.scan().depths, f);
    input.insert(input.end(), f.out().begin(), f.out().end());
  }
  rl::PolicyModel::ActOut out = policy_->act(input, env.rng(), true);
  if (history_) {
    std::vector<float> act_f(out.action.size());
    for (size_t i = 0; i < out.action.size(); ++i)
      act_f[i] = static_cast<float>(out.action[i]);
    history_->push(obs, act_f);
  }
  return out.action;
}

EvalReport evaluate(Agent& agent, const io::RunConfig& cfg,
                    const tasks::ObjectLibrary& library,
                    const rnd::RandomizationSpec& spec, const EvalRun& run) {
  if (agent.variant() == AgentVariant::oracle &&
      library.split == tasks::Split::held_out) {
    throw Fault("oracle cannot run on a held-out library: its dictionary "
                "rows exist only for trained instances");
  }
  tasks::EnvConfig env_cfg;
  env_cfg.kind = cfg.task_kind();
  env_cfg.arm = cfg.arm;
  env_cfg.depth = cfg.depth;
  const rnd::CurriculumState full = rnd::CurriculumState::full();

  EvalReport report;
  report.config_digest = cfg.digest();
  report.seeds = run.seeds;

  std::optional<PrivilegedAudit::Scope> audit;
  if (is_deployable(agent.variant())) audit.emplace();

  for (uint64_t seed : run.seeds) {
    tasks::TaskEnv env(env_cfg, &library, Rng::derive(seed, 31337));
    int successes = 0;
    double el_sum = 0.0;
    for (int ep = 0; ep < run.episodes; ++ep) {
      env.reseed(Rng::derive(Rng::derive(seed, 31337), 1000000 + ep));
      const sim::EnvParams params =
          rnd::sample_env(spec, full, library, env.rng());
      env.reset(params, rnd::noise_at(spec, full));
      agent.begin_episode();
      int el = run.max_steps;
      bool success = false;
      for (int t = 0; t < run.max_steps; ++t) {
        const std::vector<double> action =
            agent.act(env, spec.obj_rot_noise_deg);
        const tasks::TaskEnv::StepOut out = env.step(action);
        if (out.success) {
          success = true;
          el = t + 1;
          break;
        }
      }
      successes += success ? 1 : 0;
      el_sum += el;
      auto& cell = report.per_instance[params.instance_id];
      cell.first += success ? 1 : 0;
      cell.second += 1;
    }
    report.sr_per_seed.push_back(static_cast<double>(successes) / run.episodes);
    report.el_per_seed.push_back(el_sum / run.episodes);
  }

  if (audit) {
    report.privileged_reads = PrivilegedAudit::reads();
    if (report.privileged_reads != 0)
      throw Fault("privileged-access audit failed for deployable agent " +
                  to_string(agent.variant()));
  }

  auto mean_std = [](const std::vector<double>& xs, double* m, double* s) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    *m = mean;
    *s = xs.size() > 1 ? std::sqrt(var / xs.size()) : 0.0;
  };
  mean_std(report.sr_per_seed, &report.sr_mean, &report.sr_std);
  mean_std(report.el_per_seed, &report.el_mean, &report.el_std);
  return report;
}

std::string EvalReport::table() const {
  std::ostringstream out;
  out.precision(3);
  out << std::fixed;
  out << "SR " << 100.0 * sr_mean << " +/- " << 100.0 * sr_std << "  EL "
      << el_mean << " +/- " << el_std << "  (seeds";
  for (uint64_t s : seeds) out << " " << s;
  out << ", digest " << config_digest << ")";
  return out.str();
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& [id, sc] : per_instance) {
    inst.push_back({{"instance", id},
                    {"successes", sc.first},
                    {"episodes", sc.second}});
  }
  return {{"record", "eval_report"},
          {"sr_mean", sr_mean},
          {"sr_std", sr_std},
          {"el_mean", el_mean},
          {"el_std", el_std},
          {"sr_per_seed", sr_per_seed},
          {"el_per_seed", el_per_seed},
          {"per_instance", inst},
          {"privileged_reads", privileged_reads},
          {"config_digest", config_digest},
          {"seeds", seeds}};
}

std::string heatmap_grid_csv(const std::vector<tasks::ComplexityScore>& scores,
                             const std::vector<double>& srs) {
  constexpr int kGrid = 5;
  if (scores.size() != srs.size() || scores.empty())
    throw Fault("heatmap: scores and success rates must align");
  auto edges = [&](auto key) {
    std::vector<double> v;
    for (const auto& s : scores) v.push_back(key(s));
    std::sort(v.begin(), v.end());
    std::vector<double> e;
    for (int k = 1; k < kGrid; ++k)
      e.push_back(v[static_cast<size_t>(v.size() * k / kGrid)]);
    return e;
  };
  const std::vector<double> ex =
      edges([](const tasks::ComplexityScore& s) { return s.shape_complexity; });
  const std::vector<double> ey =
      edges([](const tasks::ComplexityScore& s) { return s.grasp_difficulty; });
  auto bucket = [&](double v, const std::vector<double>& e) {
    int b = 0;
    while (b < kGrid - 1 && v >= e[b]) ++b;
    return b;
  };
  double grid_sum[kGrid][kGrid] = {};
  int grid_n[kGrid][kGrid] = {};
  for (size_t i = 0; i < scores.size(); ++i) {
    const int bx = bucket(scores[i].shape_complexity, ex);
    const int by = bucket(scores[i].grasp_difficulty, ey);
    grid_sum[by][bx] += srs[i];
    grid_n[by][bx] += 1;
  }
  std::ostringstream out;
  out.precision(6);
  out << "# rows: grasp_difficulty quantile buckets (low to high); cols: "
         "shape_complexity quantile buckets (low to high)\n";
  for (int y = 0; y < kGrid; ++y) {
    for (int x = 0; x < kGrid; ++x) {
      if (x) out << ",";
      if (grid_n[y][x] > 0) out << grid_sum[y][x] / grid_n[y][x];
      // empty field, not zero, for unpopulated buckets
    }
    out << "\n";
  }
  return out.str();
}

std::string heatmap_csv(Agent& agent, const io::RunConfig& cfg,
                        const tasks::ObjectLibrary& library,
                        const rnd::RandomizationSpec& spec,
                        int episodes_per_instance, uint64_t seed,
                        std::string* instance_csv) {
  tasks::EnvConfig env_cfg;
  env_cfg.kind = cfg.task_kind();
  env_cfg.arm = cfg.arm;
  env_cfg.depth = cfg.depth;
  const rnd::CurriculumState full = rnd::CurriculumState::full();

  std::optional<PrivilegedAudit::Scope> audit;
  if (is_deployable(agent.variant())) audit.emplace();

  std::vector<tasks::ComplexityScore> scores(library.size());
  std::vector<double> srs(library.size(), 0.0);
  for (int i = 0; i < library.size(); ++i) {
    scores[i] = tasks::score_complexity(library.at(i));
    tasks::TaskEnv env(env_cfg, &library, Rng::derive(seed, 900 + i));
    int successes = 0;
    for (int ep = 0; ep < episodes_per_instance; ++ep) {
      env.reseed(Rng::derive(Rng::derive(seed, 900 + i), ep));
      sim::EnvParams params = rnd::sample_env(spec, full, library, env.rng());
      params.instance_id = i;  // pinned instance
      params.category_id = library.cat(i);
      env.reset(params, rnd::noise_at(spec, full));
      agent.begin_episode();
      for (int t = 0; t < cfg.eval.max_steps; ++t) {
        const auto action = agent.act(env, spec.obj_rot_noise_deg);
        if (env.step(action).success) {
          ++successes;
          break;
        }
      }
    }
    srs[i] = static_cast<double>(successes) / episodes_per_instance;
  }

  const std::string out = heatmap_grid_csv(scores, srs);

  if (instance_csv) {
    std::ostringstream ic;
    ic.precision(6);
    ic << "instance,category,shape_complexity,grasp_difficulty,success_rate\n";
    for (int i = 0; i < library.size(); ++i) {
      ic << i << "," << library.category_names[library.cat(i)] << ","
         << scores[i].shape_complexity << "," << scores[i].grasp_difficulty
         << "," << srs[i] << "\n";
    }
    *instance_csv = ic.str();
  }
  return out;
}

}  // namespace planarm::eval
