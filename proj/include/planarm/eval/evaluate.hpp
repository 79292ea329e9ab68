#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "planarm/adapt/adapter.hpp"
#include "planarm/io/checkpoint.hpp"
#include "planarm/io/config.hpp"
#include "planarm/rl/model.hpp"
#include "planarm/rl/trainer.hpp"

namespace planarm::eval {

enum class AgentVariant { oracle, rma2, nova, nooe, dr, dr_vi, adr };

std::string to_string(AgentVariant v);
AgentVariant agent_from_string(const std::string& s);
bool is_deployable(AgentVariant v);

// A runnable agent: the policy plus whatever feature path its variant needs.
// Deployable variants never touch privileged inputs; the audit counter
// enforces this during evaluation.
class Agent {
 public:
  Agent(AgentVariant variant, const io::RunConfig& cfg,
        const tasks::ObjectLibrary* train_library, uint64_t init_seed);

  // Loads model parameters. `policy_ck` is a phase-1 checkpoint; adapter
  // variants additionally need `adapter_ck` (phase-2), whose recorded
  // teacher digest must match the phase-1 payload.
  void load(const io::Checkpoint& policy_ck,
            const io::Checkpoint* adapter_ck = nullptr);

  void begin_episode();
  std::vector<double> act(tasks::TaskEnv& env, double rot_noise_deg);

  AgentVariant variant() const { return variant_; }
  rl::PolicyModel& policy() { return *policy_; }
  rl::EnvEncoder* encoder() { return encoder_ ? encoder_.get() : nullptr; }
  adapt::AdapterNets* adapter() { return adapter_ ? &*adapter_ : nullptr; }

 private:
  AgentVariant variant_;
  io::RunConfig cfg_;
  std::unique_ptr<rl::PolicyModel> policy_;
  std::unique_ptr<rl::EnvEncoder> encoder_;     // oracle/rma2/nova/nooe
  std::optional<adapt::AdapterNets> adapter_;   // rma2/nova/nooe
  std::unique_ptr<nn::Net<float>> vis_;         // dr_vi
  std::unique_ptr<adapt::HistoryBuffer> history_;
};

struct EvalRun {
  int episodes = 500;
  int max_steps = 200;
  std::vector<uint64_t> seeds = {1, 2, 3};
};

struct EvalReport {
  double sr_mean = 0.0, sr_std = 0.0;
  double el_mean = 0.0, el_std = 0.0;
  std::vector<double> sr_per_seed, el_per_seed;
  // instance id -> (successes, episodes)
  std::map<int, std::pair<int, int>> per_instance;
  std::string config_digest;
  std::vector<uint64_t> seeds;
  int64_t privileged_reads = 0;

  std::string table() const;
  nlohmann::json to_json() const;
};

// Runs `run.episodes` episodes per seed under `spec` (train or test-widened),
// deterministic given seeds. Oracle on a held-out library faults: its
// dictionary rows exist only for trained instances.
EvalReport evaluate(Agent& agent, const io::RunConfig& cfg,
                    const tasks::ObjectLibrary& library,
                    const rnd::RandomizationSpec& spec, const EvalRun& run);

// Per-instance success rates bucketed on a 5x5 quantile grid of
// (shape_complexity, grasp_difficulty). Returns CSV text; unpopulated
// buckets are empty fields.
std::string heatmap_csv(Agent& agent, const io::RunConfig& cfg,
                        const tasks::ObjectLibrary& library,
                        const rnd::RandomizationSpec& spec,
                        int episodes_per_instance, uint64_t seed,
                        std::string* instance_csv = nullptr);

// Grid assembly alone (pure): quantile buckets over the scores, mean SR per
// populated bucket, empty fields elsewhere.
std::string heatmap_grid_csv(const std::vector<tasks::ComplexityScore>& scores,
                             const std::vector<double>& srs);

}  // namespace planarm::eval
