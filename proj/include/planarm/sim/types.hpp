#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "planarm/geom.hpp"

namespace planarm {

// Contract violations and non-finite numerics raise Fault; nothing is
// silently repaired.
struct Fault : std::runtime_error {
  explicit Fault(const std::string& what) : std::runtime_error(what) {}
};

namespace sim {

struct ArmConfig {
  int num_joints = 4;
  std::vector<double> link_lengths = {0.3, 0.25, 0.2, 0.15};
  std::vector<double> joint_limit_lo = {-3.1, -2.7, -2.7, -2.7};
  std::vector<double> joint_limit_hi = {3.1, 2.7, 2.7, 2.7};
  double gripper_max_aperture = 0.08;  // m
  double kp = 4.0;                     // PD stiffness
  double kd = 0.2;                     // PD damping
  int control_hz = 20;
  int sim_hz = 120;

  // Planar analogue constants.
  double joint_inertia = 0.002;     // kg m^2, overdamped under (kp, kd)
  double gripper_mass = 0.002;      // kg
  double finger_length = 0.04;      // m
  double contact_tol = 0.01;        // m
  double grip_stiffness = 100.0;    // N/m, hold-force model
  double action_joint_scale = 0.1;  // rad per control step at |a| = 1
  double action_grip_scale = 0.02;  // m per control step at |a| = 1

  int substeps() const { return sim_hz / control_hz; }
  double reach() const {
    double r = 0.0;
    for (double l : link_lengths) r += l;
    return r;
  }

  void validate() const {
    if (num_joints < 1 || static_cast<int>(link_lengths.size()) != num_joints)
      throw Fault("ArmConfig: link_lengths must match num_joints");
    if (sim_hz <= 0 || control_hz <= 0 || sim_hz % control_hz != 0)
      throw Fault("ArmConfig: sim_hz must be an integer multiple of control_hz");
    if (kp <= 0.0 || kd < 0.0) throw Fault("ArmConfig: require kp > 0, kd >= 0");
    for (double l : link_lengths)
      if (l <= 0.0) throw Fault("ArmConfig: link lengths must be positive");
    if (static_cast<int>(joint_limit_lo.size()) != num_joints ||
        static_cast<int>(joint_limit_hi.size()) != num_joints)
      throw Fault("ArmConfig: joint limits must match num_joints");
  }
};

// Privileged per-episode environment parameters (the randomized e).
struct EnvParams {
  double scale_mult = 1.0;
  double density_mult = 1.0;
  double friction = 0.8;
  double force_scale = 0.0;    // disturbance magnitude multiplier (x mass)
  double disturb_prob = 0.0;   // per-control-step Bernoulli
  int instance_id = 0;
  int category_id = 0;
  // Task-specific: pick/peg: object half-extents; faucet: handle pivot.
  std::array<double, 2> task_slot = {0.0, 0.0};
};

struct DisturbanceSpec {
  double prob = 0.1;
  std::array<double, 2> force_scale_range = {0.0, 2.0};
  double decay = 0.8;
  double direction_std = 0.1;

  void validate() const {
    if (prob < 0.0 || prob > 1.0) throw Fault("DisturbanceSpec: prob in [0,1]");
    if (decay <= 0.0 || decay >= 1.0) throw Fault("DisturbanceSpec: decay in (0,1)");
    if (force_scale_range[0] > force_scale_range[1])
      throw Fault("DisturbanceSpec: force_scale range inverted");
  }
};

// Full simulator state s_t. joint_* vectors hold num_joints entries plus the
// gripper aperture as the final entry.
struct SimState {
  std::vector<double> joint_pos;
  std::vector<double> joint_vel;
  std::vector<double> joint_targets;
  Pose2 object_pose;  // faucet: p = pivot (fixed), theta = lever angle
  Vec2 object_vel;
  double object_omega = 0.0;
  std::array<bool, 2> finger_contact = {false, false};
  std::array<double, 2> finger_impulse = {0.0, 0.0};
  Vec2 residual_force;
  bool is_grasped = false;
  int64_t time_step = 0;

  // Grasp attachment bookkeeping (set at grasp onset).
  Vec2 grasp_local_pos;
  double grasp_local_theta = 0.0;
  double grasp_lever_theta = 0.0;  // faucet: lever angle at onset
  double grasp_tcp_angle = 0.0;    // faucet: TCP bearing about pivot at onset

  double aperture() const { return joint_pos.back(); }
};

// Delta position command in [-1, 1] per channel: num_joints joints plus the
// gripper, scaled by ArmConfig action scales.
struct Action {
  std::vector<double> delta;
};

// Forward-kinematics snapshot of the gripper.
struct GripperFrame {
  Vec2 palm;
  double heading = 0.0;
  Vec2 axis;     // palm -> fingertips
  Vec2 lateral;  // finger separation direction
  Vec2 tcp;      // midpoint of the grasp region
  std::array<Vec2, 2> finger_base;
  std::array<Vec2, 2> finger_tip;
};

}  // namespace sim
}  // namespace planarm
