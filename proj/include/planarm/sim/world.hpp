#pragma once

#include <optional>

#include "planarm/rng.hpp"
#include "planarm/sim/types.hpp"

namespace planarm::sim {

// The manipulated body, in canonical (scale 1) coordinates with the centroid
// at the origin. For levers the pivot sits at the origin instead and `handle`
// marks the grip point.
struct ObjectModel {
  std::vector<Vec2> verts;
  double mass = 0.1;          // kg at scale 1, density 1
  Vec2 bbox_half;             // canonical half-extents
  Vec2 handle;                // faucet grip point (canonical)
  double bbox_norm() const { return bbox_half.norm(); }
};

enum class WorldMode {
  none,      // reach task: no object interaction
  free_obj,  // pick-and-place / peg: object slides on the table
  lever,     // faucet: object rotates about a fixed pivot
};

// Deterministic planar world: N-link revolute arm with a two-finger gripper
// under PD position control, quasi-rigid object interaction, and the
// grasped-object disturbance process. One instance per environment; a single
// instance must be stepped by one caller at a time.
class World {
 public:
  World() = default;
  World(ArmConfig arm, WorldMode mode);

  void set_object(const ObjectModel& model, const EnvParams& params);
  void set_fixtures(std::vector<std::vector<Vec2>> convex_fixtures) {
    fixtures_ = std::move(convex_fixtures);
  }

  // Fresh state: arm at `home` (targets = positions, zero velocity), gripper
  // fully open, object at `object_pose`, accumulators cleared.
  SimState make_state(const std::vector<double>& home,
                      const Pose2& object_pose) const;

  // Advances one control step (substeps() physics substeps). Faults on
  // non-finite state or action.
  void step(SimState& state, const Action& action, Rng& rng) const;

  // Disturbance process (called once per control step while grasped):
  // with probability `prob` samples a fresh unit-direction force scaled by
  // object mass and force_scale, overwriting the residual; otherwise decays
  // the residual by `decay`. Returns the force applied this step.
  Vec2 update_disturbance(SimState& state, const DisturbanceSpec& spec,
                          double object_mass, Rng& rng) const;

  struct GraspResult {
    bool is_grasped = false;
    std::array<double, 2> finger_impulse = {0.0, 0.0};
  };
  // Pure evaluation of the grasp logic on `state` (onset and break rules)
  // plus the per-finger impulse increment for one substep at this state.
  GraspResult grasp_check(const SimState& state, const EnvParams& params) const;

  // Hold force at the current squeeze: 2 * friction * grip_normal_force.
  double hold_force(const SimState& state, const EnvParams& params) const;

  // PD torque on joint j at the current state (diagnostic).
  double pd_torque(const SimState& state, int j) const {
    return arm_.kp * (state.joint_targets[j] - state.joint_pos[j]) -
           arm_.kd * state.joint_vel[j];
  }

  GripperFrame gripper_frame(const SimState& state) const;
  std::vector<Vec2> object_world_verts(const SimState& state) const;
  Vec2 object_anchor(const SimState& state) const;  // centroid / handle point
  double object_mass() const { return mass_; }
  double object_scale() const { return params_.scale_mult; }
  const ObjectModel& object_model() const { return model_; }
  const EnvParams& params() const { return params_; }
  const ArmConfig& arm() const { return arm_; }
  WorldMode mode() const { return mode_; }
  const std::vector<std::vector<Vec2>>& fixtures() const { return fixtures_; }
  const DisturbanceSpec& disturbance() const { return dist_; }
  void set_disturbance(const DisturbanceSpec& d) { dist_ = d; }

  // Lever angle limits (faucet).
  double lever_theta_max = 2.0;
  double lever_theta_min = -0.3;

 private:
  struct SqueezeInfo {
    bool straddle = false;
    double width = 0.0;        // object extent across the finger axis
    double penetration = 0.0;  // max(0, width - aperture)
  };
  SqueezeInfo squeeze_info(const SimState& state) const;
  void integrate_joints(SimState& state, double dt) const;
  void update_object_free(SimState& state, double dt) const;
  void update_object_lever(SimState& state, double dt) const;
  bool object_hits_fixture(const SimState& state, Vec2* mtv) const;
  void contacts_and_grasp(SimState& state, double dt) const;

  ArmConfig arm_;
  WorldMode mode_ = WorldMode::none;
  ObjectModel model_;
  EnvParams params_;
  DisturbanceSpec dist_;
  std::vector<Vec2> scaled_verts_;
  double mass_ = 0.0;
  std::vector<std::vector<Vec2>> fixtures_;
};

constexpr double kGravity = 9.81;

}  // namespace planarm::sim
