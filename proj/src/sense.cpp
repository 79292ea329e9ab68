#include "planarm/sense/sense.hpp"

#include <algorithm>
#include <cmath>

namespace planarm::sense {

DepthScan render_depth(const sim::World& world, const sim::SimState& state,
                       const Scene& scene, const DepthConfig& cfg) {
  const sim::GripperFrame f = world.gripper_frame(state);
  DepthScan scan;
  scan.depths.assign(cfg.rays, 1.0f);
  for (int i = 0; i < cfg.rays; ++i) {
    const double offset =
        cfg.rays > 1 ? cfg.fov * (static_cast<double>(i) / (cfg.rays - 1) - 0.5)
                     : 0.0;
    const double ang = f.heading + offset;
    const Vec2 dir{std::cos(ang), std::sin(ang)};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& poly : scene.polygons) {
      for (size_t e = 0; e < poly.size(); ++e) {
        best = std::min(best, ray_segment(f.tcp, dir, poly[e],
                                          poly[(e + 1) % poly.size()]));
      }
    }
    for (const auto& seg : scene.segments) {
      best = std::min(best, ray_segment(f.tcp, dir, seg.first, seg.second));
    }
    if (std::isfinite(best)) {
      scan.depths[i] =
          static_cast<float>(std::clamp(best / cfg.max_range, 0.0, 1.0));
    }
  }
  return scan;
}

Observation observe(const sim::World& world, const sim::SimState& state,
                    const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  const sim::ArmConfig& arm = world.arm();
  Observation obs;

  // Noised joint readings; the TCP pose is FK of these readings, mirroring a
  // deployed system that only sees encoder values.
  std::vector<double> q(arm.num_joints + 1);
  for (int j = 0; j <= arm.num_joints; ++j) {
    q[j] = state.joint_pos[j] +
           rng.uniform(-noise.joint_pos_bound, noise.joint_pos_bound);
    obs.v[j] = static_cast<float>(q[j]);
    obs.v[arm.num_joints + 1 + j] = static_cast<float>(state.joint_vel[j]);
  }
  Vec2 p{0.0, 0.0};
  double th = 0.0;
  for (int j = 0; j < arm.num_joints; ++j) {
    th += q[j];
    p += Vec2{std::cos(th), std::sin(th)} * arm.link_lengths[j];
  }
  const Vec2 tcp = p + Vec2{std::cos(th), std::sin(th)} *
                           (0.5 * arm.finger_length);
  obs.v[10] = static_cast<float>(tcp.x);
  obs.v[11] = static_cast<float>(tcp.y);
  obs.v[12] = static_cast<float>(std::cos(th));
  obs.v[13] = static_cast<float>(std::sin(th));

  const Vec2 obj = world.object_anchor(state) +
                   Vec2{rng.uniform(-noise.obj_pos_bound, noise.obj_pos_bound),
                        rng.uniform(-noise.obj_pos_bound, noise.obj_pos_bound)};
  obs.v[14] = static_cast<float>(obj.x);
  obs.v[15] = static_cast<float>(obj.y);
  obs.v[16] = static_cast<float>((tcp - obj).norm());
  return obs;
}

}  // namespace planarm::sense
