#pragma once

#include <vector>

#include "planarm/rng.hpp"
#include "planarm/sim/types.hpp"
#include "planarm/sim/world.hpp"

namespace planarm::sense {

// 2D geometry visible to the wrist scanner: closed polygons plus loose
// segments (walls, table boundary).
struct Scene {
  std::vector<std::vector<Vec2>> polygons;
  std::vector<std::pair<Vec2, Vec2>> segments;
};

struct DepthConfig {
  int rays = 64;
  double fov = 2.0 * M_PI / 3.0;
  double max_range = 1.0;  // m
};

// Normalized depths in [0, 1]; rays with no hit read exactly 1.
struct DepthScan {
  std::vector<float> depths;
};

// Casts `rays` evenly spaced rays across the fov, centered on the gripper
// axis, from the TCP. Pure function of (state, scene, cfg).
DepthScan render_depth(const sim::World& world, const sim::SimState& state,
                       const Scene& scene, const DepthConfig& cfg);

struct NoiseSpec {
  double obj_pos_bound = 0.005;     // m
  double obj_rot_bound_deg = 10.0;  // deg, privileged rotation channel
  double joint_pos_bound = 0.005;   // rad

  void validate() const {
    if (obj_pos_bound < 0.0 || obj_rot_bound_deg < 0.0 || joint_pos_bound < 0.0)
      throw Fault("NoiseSpec: bounds must be non-negative");
  }
};

// Deployable observation x_t: agent block (5 joint positions, 5 joint
// velocities, TCP pose as x, y, cos, sin) then object block (object position,
// TCP->object distance).
struct Observation {
  static constexpr int kAgentDim = 14;
  static constexpr int kObjectDim = 3;
  static constexpr int kDim = kAgentDim + kObjectDim;

  std::array<float, kDim> v{};

  Vec2 tcp() const { return {v[10], v[11]}; }
  Vec2 object_pos() const { return {v[14], v[15]}; }
  double distance() const { return v[16]; }
};

// Assembles the observation with uniform noise within bounds on joint
// positions and the object position. The TCP pose is forward kinematics of
// the noised joint readings; the distance channel is recomputed from the
// noised positions.
Observation observe(const sim::World& world, const sim::SimState& state,
                    const NoiseSpec& noise, Rng& rng);

}  // namespace planarm::sense
