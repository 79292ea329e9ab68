#pragma once

#include <string>
#include <vector>

#include "planarm/rng.hpp"
#include "planarm/sense/sense.hpp"
#include "planarm/sim/world.hpp"
#include "planarm/tasks/library.hpp"

namespace planarm::tasks {

enum class TaskKind { reach, pick_place, peg_insert, faucet };

std::string to_string(TaskKind k);
TaskKind task_from_string(const std::string& s);

// Episode goal. The goal vector fed to the policy derives its distance
// channels from the (noised) observation at assembly time.
struct Goal {
  TaskKind kind = TaskKind::pick_place;
  Vec2 pos;                // pick/reach target, peg hole center
  double hole_angle = 0.0; // peg insertion axis, pointing into the wall
  double theta_goal = 0.0; // faucet turn angle

  int dim() const {
    switch (kind) {
      case TaskKind::faucet: return 2;
      case TaskKind::peg_insert: return 8;
      default: return 6;
    }
  }
  void assemble(const Vec2& tcp, const Vec2& obj, double theta_current,
                float* out) const;
};

int goal_dim(TaskKind k);

// Dense rewards. Non-finite inputs fault; the success branch returns
// exactly 10.
double reward_pick_place(double dist_tcp_obj, double bbox_norm, bool grasped,
                         double dist_obj_goal, bool success);
double reward_peg(double dist_tcp_obj, double bbox_norm, bool grasped,
                  double align_err, double dist_obj_goal, bool success);
double reward_faucet(double dist_tcp_handle, double handle_margin,
                     double theta_remaining, bool success);

struct EnvConfig {
  TaskKind kind = TaskKind::pick_place;
  sim::ArmConfig arm;
  sense::DepthConfig depth;
  double success_tol = 0.025;       // m, object-to-goal
  double static_speed = 0.05;       // rad/s (and m/s for the gripper)
  double min_obj_goal_sep = 0.15;   // m, forces actual transport
  double spawn_r_lo = 0.30, spawn_r_hi = 0.70;
  double goal_r_lo = 0.30, goal_r_hi = 0.78;
  double faucet_goal_lo = M_PI / 6.0, faucet_goal_hi = M_PI / 2.0;
  double peg_clearance = 0.003;     // m at scale 1
  double slot_depth = 0.08;         // m
  std::vector<double> home = {0.0, 0.7, 0.7, 0.4};
};

// One episodic environment instance. Owns its RNG stream; fully independent
// of other instances, so many can be stepped concurrently.
class TaskEnv {
 public:
  TaskEnv(EnvConfig cfg, const ObjectLibrary* library, uint64_t seed);

  void reseed(uint64_t seed) { rng_.reseed(seed); }
  Rng& rng() { return rng_; }

  // Starts an episode under the given randomization draw. Fills the
  // task-specific slot of the parameters (object extents / faucet pivot).
  void reset(sim::EnvParams params, const sense::NoiseSpec& noise);

  struct StepOut {
    double reward = 0.0;
    bool success = false;
  };
  StepOut step(const std::vector<double>& action);

  const sense::Observation& observation() const { return obs_; }
  std::vector<float> goal_vec() const;
  sense::DepthScan scan() const;
  const Goal& goal() const { return goal_; }
  const sim::SimState& state() const { return state_; }
  const sim::World& world() const { return world_; }
  const EnvConfig& config() const { return cfg_; }
  const ObjectLibrary& library() const { return *library_; }
  int episode_steps() const { return episode_steps_; }
  double slot_width() const { return slot_width_; }
  bool success_now() const;
  double max_joint_speed() const;
  // Current reward quantities (true state, not noised).
  double dist_tcp_obj() const;
  double dist_obj_goal() const;

 private:
  void build_scene();
  void sample_goal_and_layout();
  double reward_now() const;

  EnvConfig cfg_;
  const ObjectLibrary* library_ = nullptr;
  Rng rng_;
  sim::World world_;
  sim::SimState state_;
  sense::NoiseSpec noise_;
  sense::Observation obs_;
  Goal goal_;
  sense::Scene static_scene_;  // fixtures + table boundary
  double slot_width_ = 0.0;
  int episode_steps_ = 0;
};

}  // namespace planarm::tasks
