// planarm: planar-arm manipulation training and evaluation stack.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "planarm/adapt/adapter.hpp"
#include "planarm/eval/evaluate.hpp"
#include "planarm/io/checkpoint.hpp"
#include "planarm/io/config.hpp"
#include "planarm/io/metrics.hpp"
#include "planarm/rl/trainer.hpp"

namespace fs = std::filesystem;
using namespace planarm;

namespace {

tasks::ObjectLibrary build_library(const io::RunConfig& cfg,
                                   tasks::TaskKind task, bool held_out) {
  const auto& lc = cfg.library;
  switch (task) {
    case tasks::TaskKind::reach:
      return tasks::make_reach_library();
    case tasks::TaskKind::pick_place: {
      if (held_out) {
        const int per = (lc.held_out_total + 5) / 6;
        return tasks::make_pick_library(tasks::Split::held_out, per,
                                        lc.library_seed);
      }
      return tasks::make_pick_library(tasks::Split::train, lc.per_category,
                                      lc.library_seed);
    }
    case tasks::TaskKind::peg_insert:
      return tasks::make_peg_library(lc.peg_count, lc.library_seed);
    case tasks::TaskKind::faucet:
      return tasks::make_faucet_library(lc.faucet_count, lc.library_seed);
  }
  throw Fault("unhandled task");
}

io::RunConfig load_config(const std::string& path, const std::string& task,
                          uint64_t seed_override, bool has_seed) {
  io::RunConfig cfg =
      path.empty() ? io::RunConfig{} : io::RunConfig::load(path);
  if (!task.empty()) cfg.task = task;
  if (has_seed) cfg.seed = seed_override;
  return cfg;
}

void prepare_run_dir(const io::RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  cfg.save(out_dir + "/config.ini");
}

std::vector<uint64_t> parse_seeds(const std::string& s) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw Fault("no seeds given");
  return seeds;
}

nlohmann::json spec_json(const rnd::RandomizationSpec& spec) {
  return {{"mode", spec.mode == rnd::RandomizationSpec::Mode::test ? "test"
                                                                   : "train"},
          {"scale", {spec.scale.lo, spec.scale.hi}},
          {"density", {spec.density.lo, spec.density.hi}},
          {"friction", {spec.friction.lo, spec.friction.hi}},
          {"force_scale", {spec.force_scale.lo, spec.force_scale.hi}},
          {"obj_pos_noise", spec.obj_pos_noise},
          {"obj_rot_noise_deg", spec.obj_rot_noise_deg},
          {"joint_pos_noise", spec.joint_pos_noise}};
}

int cmd_train_policy(const std::string& config_path, const std::string& task,
                     const std::string& out_dir, uint64_t seed, bool has_seed,
                     const std::string& variant_name) {
  io::RunConfig cfg = load_config(config_path, task, seed, has_seed);
  cfg.out_dir = out_dir;
  prepare_run_dir(cfg, out_dir);
  const rl::TrainVariant variant =
      rl::train_variant_from_string(variant_name);
  const tasks::ObjectLibrary library =
      build_library(cfg, cfg.task_kind(), false);
  rl::Phase1Trainer trainer(cfg, variant, &library, cfg.seed);
  io::MetricsWriter metrics(out_dir + "/metrics.jsonl", cfg.digest(),
                            "train-" + variant_name);
  trainer.run(&metrics, [&](const rl::UpdateStats& s) {
    if (s.update % 10 == 0) {
      std::cout << "update " << s.update << " steps " << s.env_steps
                << " return " << s.mean_return << " sr " << s.success_rate
                << " kl " << s.approx_kl << "\n";
    }
  });
  io::Checkpoint ck = trainer.make_checkpoint();
  ck.save(out_dir + "/checkpoint.bin");
  metrics.row({{"record", "final"},
               {"env_steps", trainer.env_steps()},
               {"mean_step_seconds", trainer.mean_step_seconds()},
               {"checkpoint", "checkpoint.bin"}});
  std::cout << "saved " << out_dir << "/checkpoint.bin\n";
  return 0;
}

int cmd_train_adapter(const std::string& config_path,
                      const std::string& policy_path,
                      const std::string& out_dir, bool no_vision,
                      uint64_t seed, bool has_seed) {
  io::RunConfig cfg = load_config(config_path, "", seed, has_seed);
  cfg.out_dir = out_dir;
  const io::Checkpoint teacher_ck = io::Checkpoint::load(policy_path);
  if (teacher_ck.config_digest != cfg.digest()) {
    throw Fault("phase-1 checkpoint config digest " + teacher_ck.config_digest +
                " does not match this config (" + cfg.digest() + ")");
  }
  prepare_run_dir(cfg, out_dir);
  const tasks::ObjectLibrary library =
      build_library(cfg, cfg.task_kind(), false);

  // Rebuild the frozen teacher.
  Rng init(Rng::derive(cfg.seed, 42));
  rl::PolicyConfig pc;
  pc.obs_dim = sense::Observation::kDim;
  pc.goal_dim = tasks::goal_dim(cfg.task_kind());
  pc.hidden = cfg.net.policy_hidden;
  pc.z_dim = cfg.net.z_dim;
  rl::PolicyModel policy(pc, init);
  rl::EncoderConfig ec;
  ec.z_dim = cfg.net.z_dim;
  ec.hidden = cfg.net.encoder_hidden;
  ec.use_dictionaries = teacher_ck.phase != "phase1:nooe";
  rl::EnvEncoder encoder(ec, library.size(), library.num_categories(), init);
  std::vector<nn::Blob<float>*> blobs = policy.blobs();
  for (auto* b : encoder.blobs()) blobs.push_back(b);
  teacher_ck.restore_into(blobs);

  adapt::Phase2Trainer trainer(cfg, &policy, &encoder, &library, !no_vision,
                               cfg.seed);
  io::MetricsWriter metrics(out_dir + "/metrics.jsonl", cfg.digest(),
                            no_vision ? "train-adapter-nova" : "train-adapter");
  const double init_loss = trainer.initial_val_loss();
  metrics.row({{"record", "adapter_init"}, {"val_loss", init_loss}});
  const auto curve = trainer.run(&metrics);
  io::Checkpoint ck = trainer.make_checkpoint(teacher_ck.payload_digest());
  ck.save(out_dir + "/adapter.bin");
  double final_val = -1.0;
  for (const auto& p : curve) {
    if (p.val_loss >= 0.0) final_val = p.val_loss;
  }
  metrics.row({{"record", "final"},
               {"initial_val_loss", init_loss},
               {"final_val_loss", final_val},
               {"checkpoint", "adapter.bin"}});
  std::cout << "adapter loss " << init_loss << " -> " << final_val << "; saved "
            << out_dir << "/adapter.bin\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& agent_name,
                 const std::string& policy_path, const std::string& adapter_path,
                 int episodes, const std::string& seeds_str, bool widen,
                 bool held_out, const std::string& out_path) {
  io::RunConfig cfg = load_config(config_path, "", 0, false);
  const eval::AgentVariant variant = eval::agent_from_string(agent_name);
  const tasks::ObjectLibrary train_library =
      build_library(cfg, cfg.task_kind(), false);
  const tasks::ObjectLibrary eval_library =
      build_library(cfg, cfg.task_kind(), held_out);

  const io::Checkpoint policy_ck = io::Checkpoint::load(policy_path);
  if (policy_ck.config_digest != cfg.digest())
    throw Fault("checkpoint config digest mismatch");
  std::optional<io::Checkpoint> adapter_ck;
  if (!adapter_path.empty()) adapter_ck = io::Checkpoint::load(adapter_path);

  eval::Agent agent(variant, cfg, &train_library, cfg.seed);
  agent.load(policy_ck, adapter_ck ? &*adapter_ck : nullptr);

  rnd::RandomizationSpec spec = cfg.rand;
  if (widen) spec = rnd::widen_for_test(spec);

  eval::EvalRun run;
  run.episodes = episodes > 0 ? episodes : cfg.eval.episodes;
  run.max_steps = cfg.eval.max_steps;
  run.seeds = parse_seeds(seeds_str);

  const eval::EvalReport report =
      evaluate(agent, cfg, eval_library, spec, run);
  std::cout << agent_name << (held_out ? " [held-out]" : "") << ": "
            << report.table() << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    nlohmann::json j = report.to_json();
    j["agent"] = agent_name;
    j["library"] = held_out ? "held_out" : "train";
    j["effective_ranges"] = spec_json(spec);
    out << j.dump() << "\n";
  }
  return 0;
}

int cmd_heatmap(const std::string& config_path, const std::string& agent_name,
                const std::string& policy_path, const std::string& adapter_path,
                const std::string& library_name, int episodes_per_instance,
                const std::string& out_path) {
  io::RunConfig cfg = load_config(config_path, "", 0, false);
  const eval::AgentVariant variant = eval::agent_from_string(agent_name);
  const tasks::ObjectLibrary train_library =
      build_library(cfg, cfg.task_kind(), false);
  const bool held_out = library_name == "held_out";
  const tasks::ObjectLibrary lib =
      build_library(cfg, cfg.task_kind(), held_out);
  const io::Checkpoint policy_ck = io::Checkpoint::load(policy_path);
  std::optional<io::Checkpoint> adapter_ck;
  if (!adapter_path.empty()) adapter_ck = io::Checkpoint::load(adapter_path);
  eval::Agent agent(variant, cfg, &train_library, cfg.seed);
  agent.load(policy_ck, adapter_ck ? &*adapter_ck : nullptr);
  const rnd::RandomizationSpec spec = rnd::widen_for_test(cfg.rand);
  const int eps = episodes_per_instance > 0 ? episodes_per_instance
                                            : cfg.eval.heatmap_episodes;
  std::string instances;
  const std::string grid =
      eval::heatmap_csv(agent, cfg, lib, spec, eps, cfg.seed, &instances);
  std::ofstream out(out_path);
  if (!out) throw Fault("cannot write " + out_path);
  out << "# config_digest " << cfg.digest() << "\n" << grid;
  std::ofstream iout(out_path + ".instances.csv");
  iout << instances;
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_verify(const std::string& run_dir) {
  const io::RunConfig cfg = io::RunConfig::load(run_dir + "/config.ini");
  const std::string digest = cfg.digest();
  int checked = 0, bad = 0;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string path = entry.path().string();
    if (entry.path().extension() == ".jsonl") {
      std::ifstream in(path);
      std::string line;
      if (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const std::string d = j.value("config_digest", "");
        ++checked;
        if (d != digest) {
          ++bad;
          std::cout << "MISMATCH " << path << ": " << d << " vs " << digest
                    << "\n";
        }
      }
    } else if (entry.path().extension() == ".bin") {
      const io::Checkpoint ck = io::Checkpoint::load(path);
      ++checked;
      if (ck.config_digest != digest) {
        ++bad;
        std::cout << "MISMATCH " << path << ": " << ck.config_digest << " vs "
                  << digest << "\n";
      }
    }
  }
  std::cout << "verified " << checked << " artifacts against digest " << digest
            << (bad ? " (FAILURES)" : " (all ok)") << "\n";
  return bad ? 1 : 0;
}

int cmd_scan_trace(const std::string& config_path, int episodes,
                   const std::string& out_path) {
  io::RunConfig cfg = load_config(config_path, "", 0, false);
  const tasks::ObjectLibrary library =
      build_library(cfg, cfg.task_kind(), false);
  tasks::EnvConfig env_cfg;
  env_cfg.kind = cfg.task_kind();
  env_cfg.arm = cfg.arm;
  env_cfg.depth = cfg.depth;
  tasks::TaskEnv env(env_cfg, &library, Rng::derive(cfg.seed, 606));
  std::ofstream out(out_path);
  if (!out) throw Fault("cannot write " + out_path);
  out << "episode,step";
  for (int r = 0; r < cfg.depth.rays; ++r) out << ",d" << r;
  out << "\n";
  const rnd::CurriculumState full = rnd::CurriculumState::full();
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(rnd::sample_env(cfg.rand, full, library, env.rng()),
              rnd::noise_at(cfg.rand, full));
    for (int t = 0; t < cfg.ppo.horizon; ++t) {
      const sense::DepthScan scan = env.scan();
      out << ep << "," << t;
      for (float d : scan.depths) out << "," << d;
      out << "\n";
      std::vector<double> action(cfg.arm.num_joints + 1);
      for (double& a : action) a = env.rng().uniform(-1.0, 1.0);
      env.step(action);
    }
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar-arm manipulation: two-phase adaptive policy training, "
               "baselines, and evaluation"};
  app.require_subcommand(1);

  std::string config_path, task, out_dir = "runs/run", variant = "teacher";
  std::string policy_path, adapter_path, agent, seeds = "1,2,3";
  std::string library_name = "train", run_dir, out_path;
  uint64_t seed = 0;
  bool widen = false, no_vision = false, held_out = false;
  int episodes = 0, eps_per_instance = 0;

  auto* tp = app.add_subcommand("train-policy",
                                "phase-1 training (privileged teacher)");
  tp->add_option("--task", task, "reach|pick_place|peg_insert|faucet");
  tp->add_option("--config", config_path, "config file");
  tp->add_option("--out", out_dir, "run directory")->required();
  auto* tp_seed = tp->add_option("--seed", seed, "master seed override");
  tp->add_option("--variant", variant,
                 "teacher|nooe (ablation without object dictionaries)");

  auto* tb = app.add_subcommand("train-baseline",
                                "single-phase baselines: dr, dr_vi, adr");
  std::string bvariant = "dr";
  tb->add_option("--variant", bvariant, "dr|dr_vi|adr")->required();
  tb->add_option("--task", task, "task id");
  tb->add_option("--config", config_path, "config file");
  tb->add_option("--out", out_dir, "run directory")->required();
  auto* tb_seed = tb->add_option("--seed", seed, "master seed override");

  auto* ta = app.add_subcommand("train-adapter",
                                "phase-2 adapter regression against a frozen "
                                "phase-1 checkpoint");
  ta->add_option("--policy", policy_path, "phase-1 checkpoint")->required();
  ta->add_option("--config", config_path, "config file");
  ta->add_option("--out", out_dir, "run directory")->required();
  ta->add_flag("--no-vision", no_vision, "NoVA ablation: zero the depth slot");
  auto* ta_seed = ta->add_option("--seed", seed, "master seed override");

  auto* ev = app.add_subcommand("evaluate", "run episodes and report SR/EL");
  ev->add_option("--agent", agent,
                 "oracle|rma2|nova|nooe|dr|dr_vi|adr")->required();
  ev->add_option("--config", config_path, "config file");
  ev->add_option("--policy", policy_path, "phase-1 checkpoint")->required();
  ev->add_option("--adapter", adapter_path, "phase-2 checkpoint");
  ev->add_option("--episodes", episodes, "episodes per seed");
  ev->add_option("--seeds", seeds, "comma-separated seed list");
  ev->add_flag("--test-widening", widen, "apply the test-time range widening");
  ev->add_flag("--held-out", held_out, "evaluate on the held-out library");
  ev->add_option("--out", out_path, "report file (jsonl)");

  auto* hm = app.add_subcommand("heatmap", "per-instance SR grid (CSV)");
  hm->add_option("--agent", agent, "agent variant")->required();
  hm->add_option("--config", config_path, "config file");
  hm->add_option("--policy", policy_path, "phase-1 checkpoint")->required();
  hm->add_option("--adapter", adapter_path, "phase-2 checkpoint");
  hm->add_option("--library", library_name, "train|held_out");
  hm->add_option("--episodes-per-instance", eps_per_instance, "episodes");
  hm->add_option("--out", out_path, "grid CSV path")->required();

  auto* vf = app.add_subcommand("verify",
                                "recompute the config digest and check run "
                                "artifacts");
  vf->add_option("--run", run_dir, "run directory")->required();

  auto* ic = app.add_subcommand("init-config", "write the default config");
  ic->add_option("--out", out_path, "config path")->required();
  ic->add_option("--task", task, "task id");

  auto* st = app.add_subcommand("scan-trace",
                                "export depth scans as CSV (debugging)");
  st->add_option("--config", config_path, "config file");
  st->add_option("--episodes", episodes, "episodes")->default_val(1);
  st->add_option("--out", out_path, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (tp->parsed()) {
      return cmd_train_policy(config_path, task, out_dir, seed,
                              !tp_seed->empty(), variant);
    }
    if (tb->parsed()) {
      return cmd_train_policy(config_path, task, out_dir, seed,
                              !tb_seed->empty(), bvariant);
    }
    if (ta->parsed()) {
      return cmd_train_adapter(config_path, policy_path, out_dir, no_vision,
                               seed, !ta_seed->empty());
    }
    if (ev->parsed()) {
      return cmd_evaluate(config_path, agent, policy_path, adapter_path,
                          episodes, seeds, widen, held_out, out_path);
    }
    if (hm->parsed()) {
      return cmd_heatmap(config_path, agent, policy_path, adapter_path,
                         library_name, eps_per_instance, out_path);
    }
    if (vf->parsed()) return cmd_verify(run_dir);
    if (ic->parsed()) {
      io::RunConfig cfg;
      if (!task.empty()) cfg.task = task;
      cfg.save(out_path);
      std::cout << "wrote " << out_path << " (digest " << cfg.digest() << ")\n";
      return 0;
    }
    if (st->parsed()) return cmd_scan_trace(config_path, episodes, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
