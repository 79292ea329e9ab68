#include "planarm/sim/world.hpp"

#include <algorithm>
#include <cmath>

namespace planarm::sim {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Fault(std::string("non-finite ") + what);
  }
}

}  // namespace

World::World(ArmConfig arm, WorldMode mode) : arm_(std::move(arm)), mode_(mode) {
  arm_.validate();
}

void World::set_object(const ObjectModel& model, const EnvParams& params) {
  model_ = model;
  params_ = params;
  scaled_verts_.clear();
  scaled_verts_.reserve(model.verts.size());
  for (const Vec2& v : model.verts) scaled_verts_.push_back(v * params.scale_mult);
  mass_ = model.mass * params.density_mult * params.scale_mult * params.scale_mult;
}

SimState World::make_state(const std::vector<double>& home,
                           const Pose2& object_pose) const {
  if (static_cast<int>(home.size()) != arm_.num_joints)
    throw Fault("make_state: home configuration size mismatch");
  SimState s;
  s.joint_pos = home;
  s.joint_pos.push_back(arm_.gripper_max_aperture);
  s.joint_vel.assign(arm_.num_joints + 1, 0.0);
  s.joint_targets = s.joint_pos;
  s.object_pose = object_pose;
  return s;
}

GripperFrame World::gripper_frame(const SimState& state) const {
  GripperFrame f;
  Vec2 p{0.0, 0.0};
  double th = 0.0;
  for (int j = 0; j < arm_.num_joints; ++j) {
    th += state.joint_pos[j];
    p += Vec2{std::cos(th), std::sin(th)} * arm_.link_lengths[j];
  }
  f.palm = p;
  f.heading = th;
  f.axis = {std::cos(th), std::sin(th)};
  f.lateral = {-std::sin(th), std::cos(th)};
  f.tcp = f.palm + f.axis * (0.5 * arm_.finger_length);
  const double half_ap = 0.5 * state.aperture();
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? 1.0 : -1.0;  // 0: left finger, 1: right
    f.finger_base[i] = f.palm + f.lateral * (side * half_ap);
    f.finger_tip[i] = f.finger_base[i] + f.axis * arm_.finger_length;
  }
  return f;
}

std::vector<Vec2> World::object_world_verts(const SimState& state) const {
  std::vector<Vec2> out;
  out.reserve(scaled_verts_.size());
  for (const Vec2& v : scaled_verts_) out.push_back(state.object_pose.apply(v));
  return out;
}

Vec2 World::object_anchor(const SimState& state) const {
  if (mode_ == WorldMode::lever)
    return state.object_pose.apply(model_.handle * params_.scale_mult);
  return state.object_pose.p;
}

Vec2 World::update_disturbance(SimState& state, const DisturbanceSpec& spec,
                               double object_mass, Rng& rng) const {
  spec.validate();
  if (rng.bernoulli(spec.prob)) {
    // Fresh force: Gaussian direction normalized to unit length, scaled by
    // the object mass and the episode's force_scale. Overwrites the residual.
    Vec2 dir;
    do {
      dir = {rng.normal(0.0, spec.direction_std),
             rng.normal(0.0, spec.direction_std)};
    } while (dir.norm() < 1e-12);
    dir = dir.normalized();
    state.residual_force = dir * (object_mass * params_.force_scale);
  } else {
    state.residual_force = state.residual_force * spec.decay;
  }
  return state.residual_force;
}

World::SqueezeInfo World::squeeze_info(const SimState& state) const {
  SqueezeInfo info;
  if (mode_ == WorldMode::none || scaled_verts_.empty()) return info;
  const GripperFrame f = gripper_frame(state);
  double lo = 1e9, hi = -1e9;
  bool any = false;
  const double axial_margin = 0.5 * arm_.finger_length + arm_.contact_tol;
  for (const Vec2& v0 : scaled_verts_) {
    const Vec2 v = state.object_pose.apply(v0);
    const Vec2 rel = v - f.tcp;
    if (std::abs(rel.dot(f.axis)) > axial_margin) continue;
    any = true;
    const double d = rel.dot(f.lateral);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (!any) {
    // Object not within the finger span; fall back to the full extent.
    for (const Vec2& v0 : scaled_verts_) {
      const Vec2 rel = state.object_pose.apply(v0) - f.tcp;
      const double d = rel.dot(f.lateral);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  info.straddle = any && lo < 0.0 && hi > 0.0;
  info.width = hi - lo;
  info.penetration = std::max(0.0, info.width - state.aperture());
  return info;
}

double World::hold_force(const SimState& state, const EnvParams& params) const {
  const SqueezeInfo sq = squeeze_info(state);
  const double grip_normal = arm_.grip_stiffness * sq.penetration;
  return 2.0 * params.friction * grip_normal;
}

World::GraspResult World::grasp_check(const SimState& state,
                                      const EnvParams& params) const {
  GraspResult r;
  if (mode_ == WorldMode::none || scaled_verts_.empty()) return r;
  const GripperFrame f = gripper_frame(state);
  const std::vector<Vec2> verts = object_world_verts(state);
  std::array<bool, 2> contact = {false, false};
  for (int i = 0; i < 2; ++i) {
    contact[i] = dist_segment_polygon(f.finger_base[i], f.finger_tip[i],
                                      verts) <= arm_.contact_tol;
  }
  const SqueezeInfo sq = squeeze_info(state);
  const bool closing =
      state.joint_targets.back() < state.joint_pos.back() - 1e-9;
  const double dt = 1.0 / arm_.sim_hz;

  bool grasped = state.is_grasped;
  if (!grasped) {
    grasped = contact[0] && contact[1] && closing && sq.penetration > 0.0 &&
              sq.straddle;
  } else {
    if (sq.penetration <= 0.0) {
      grasped = false;  // fingers opened past the object width
    } else {
      const double hold = 2.0 * params.friction * arm_.grip_stiffness *
                          sq.penetration;
      if (state.residual_force.norm() > hold) grasped = false;
    }
  }
  r.is_grasped = grasped;
  if (grasped) {
    const double grip_normal = arm_.grip_stiffness * sq.penetration;
    const double load = 0.5 * state.residual_force.norm();
    r.finger_impulse = {(grip_normal + load) * dt, (grip_normal + load) * dt};
  }
  return r;
}

void World::integrate_joints(SimState& state, double dt) const {
  // Decoupled per-joint PD: tau = kp (target - q) - kd qdot, semi-implicit
  // Euler. Joint limits clamp position and kill velocity into the stop.
  for (int j = 0; j <= arm_.num_joints; ++j) {
    const bool grip = j == arm_.num_joints;
    const double inertia = grip ? arm_.gripper_mass : arm_.joint_inertia;
    const double tau = arm_.kp * (state.joint_targets[j] - state.joint_pos[j]) -
                       arm_.kd * state.joint_vel[j];
    state.joint_vel[j] += tau / inertia * dt;
    state.joint_pos[j] += state.joint_vel[j] * dt;
    const double lo = grip ? 0.0 : arm_.joint_limit_lo[j];
    const double hi = grip ? arm_.gripper_max_aperture : arm_.joint_limit_hi[j];
    if (state.joint_pos[j] < lo) {
      state.joint_pos[j] = lo;
      if (state.joint_vel[j] < 0.0) state.joint_vel[j] = 0.0;
    } else if (state.joint_pos[j] > hi) {
      state.joint_pos[j] = hi;
      if (state.joint_vel[j] > 0.0) state.joint_vel[j] = 0.0;
    }
  }
}

bool World::object_hits_fixture(const SimState& state, Vec2* mtv) const {
  if (fixtures_.empty()) return false;
  const std::vector<Vec2> verts = object_world_verts(state);
  for (const auto& fx : fixtures_) {
    if (convex_overlap_mtv(verts, fx, mtv)) return true;
  }
  return false;
}

void World::update_object_free(SimState& state, double dt) const {
  // Coulomb friction against the table decays sliding and spin.
  const double dv = params_.friction * kGravity * dt;
  const double speed = state.object_vel.norm();
  if (speed <= dv) {
    state.object_vel = {0.0, 0.0};
  } else {
    state.object_vel = state.object_vel * ((speed - dv) / speed);
  }
  const double dw = params_.friction * kGravity / 0.05 * dt;
  if (std::abs(state.object_omega) <= dw) {
    state.object_omega = 0.0;
  } else {
    state.object_omega -= dw * (state.object_omega > 0.0 ? 1.0 : -1.0);
  }
  state.object_pose.p += state.object_vel * dt;
  state.object_pose.theta = wrap_angle(state.object_pose.theta +
                                       state.object_omega * dt);

  // Finger pushes: sample points along each finger; a penetrating point
  // shoves the object out along the nearest boundary normal.
  const GripperFrame f = gripper_frame(state);
  std::vector<Vec2> verts = object_world_verts(state);
  Polygon poly{verts};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = f.finger_base[i] +
                     (f.finger_tip[i] - f.finger_base[i]) * (0.5 * k);
      if (!poly.contains(p)) continue;
      double best = 1e9;
      Vec2 push{0.0, 0.0};
      for (size_t e = 0; e < verts.size(); ++e) {
        const Vec2& a = verts[e];
        const Vec2& b = verts[(e + 1) % verts.size()];
        const double d = dist_point_segment(p, a, b);
        if (d < best) {
          best = d;
          // Translating the object by d along this direction moves the
          // penetrating point onto the nearest edge (CCW winding).
          push = (b - a).perp().normalized() * d;
        }
      }
      state.object_pose.p += push;
      const Vec2 dvel = push * (0.5 / dt);
      state.object_vel += dvel;
      state.finger_impulse[i] += mass_ * dvel.norm();
      verts = object_world_verts(state);
      poly.verts = verts;
    }
  }

  // Fixture overlap (free peg resting against the slot walls).
  Vec2 mtv;
  if (object_hits_fixture(state, &mtv)) {
    state.object_pose.p += mtv;
    state.object_vel = {0.0, 0.0};
  }
}

void World::update_object_lever(SimState& state, double dt) const {
  (void)dt;
  // Quasi-static lever: rotates only while pushed; dry friction stops it
  // instantly otherwise. Finger penetration resolves by rotating the lever
  // about its pivot in whichever direction clears the finger.
  const GripperFrame f = gripper_frame(state);
  std::vector<Vec2> verts = object_world_verts(state);
  Polygon poly{verts};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = f.finger_base[i] +
                     (f.finger_tip[i] - f.finger_base[i]) * (0.5 * k);
      if (!poly.contains(p)) continue;
      double depth = 1e9;
      for (size_t e = 0; e < verts.size(); ++e) {
        depth = std::min(depth, dist_point_segment(p, verts[e],
                                                   verts[(e + 1) % verts.size()]));
      }
      const double radius = std::max((p - state.object_pose.p).norm(), 0.02);
      const double mag = std::min(depth / radius, 0.2);
      double best_theta = state.object_pose.theta;
      double best_d = signed_dist_polygon(p, verts);
      for (const double sign : {1.0, -1.0}) {
        SimState probe = state;
        probe.object_pose.theta =
            std::clamp(state.object_pose.theta + sign * mag, lever_theta_min,
                       lever_theta_max);
        const double d = signed_dist_polygon(p, object_world_verts(probe));
        if (d > best_d) {
          best_d = d;
          best_theta = probe.object_pose.theta;
        }
      }
      if (best_theta != state.object_pose.theta) {
        state.finger_impulse[i] += mass_ * std::abs(best_theta -
                                                    state.object_pose.theta);
        state.object_pose.theta = best_theta;
        verts = object_world_verts(state);
        poly.verts = verts;
      }
    }
  }
}

void World::contacts_and_grasp(SimState& state, double dt) const {
  if (mode_ == WorldMode::none || scaled_verts_.empty()) {
    state.finger_contact = {false, false};
    return;
  }
  const GripperFrame f = gripper_frame(state);
  const std::vector<Vec2> verts = object_world_verts(state);
  for (int i = 0; i < 2; ++i) {
    state.finger_contact[i] =
        dist_segment_polygon(f.finger_base[i], f.finger_tip[i], verts) <=
        arm_.contact_tol;
  }
  const SqueezeInfo sq = squeeze_info(state);
  const bool closing =
      state.joint_targets.back() < state.joint_pos.back() - 1e-9;

  if (!state.is_grasped) {
    if (state.finger_contact[0] && state.finger_contact[1] && closing &&
        sq.penetration > 0.0 && sq.straddle) {
      state.is_grasped = true;
      if (mode_ == WorldMode::lever) {
        state.grasp_lever_theta = state.object_pose.theta;
        const Vec2 r = f.tcp - state.object_pose.p;
        state.grasp_tcp_angle = std::atan2(r.y, r.x);
      } else {
        const Pose2 tcp_pose{f.tcp, f.heading};
        state.grasp_local_pos = tcp_pose.apply_inv(state.object_pose.p);
        state.grasp_local_theta =
            wrap_angle(state.object_pose.theta - f.heading);
      }
      state.object_vel = {0.0, 0.0};
      state.object_omega = 0.0;
    }
  }

  if (state.is_grasped) {
    const double grip_normal = arm_.grip_stiffness * sq.penetration;
    const double load = 0.5 * state.residual_force.norm();
    state.finger_impulse[0] += (grip_normal + load) * dt;
    state.finger_impulse[1] += (grip_normal + load) * dt;
    state.finger_contact = {true, true};
  }
}

void World::step(SimState& state, const Action& action, Rng& rng) const {
  require_finite(state.joint_pos, "joint_pos");
  require_finite(state.joint_vel, "joint_vel");
  require_finite(action.delta, "action");
  if (!std::isfinite(state.object_pose.p.x) ||
      !std::isfinite(state.object_pose.p.y) ||
      !std::isfinite(state.object_pose.theta))
    throw Fault("non-finite object pose");
  if (static_cast<int>(action.delta.size()) != arm_.num_joints + 1)
    throw Fault("action size mismatch");

  // Delta position targets.
  for (int j = 0; j <= arm_.num_joints; ++j) {
    const bool grip = j == arm_.num_joints;
    const double scale = grip ? arm_.action_grip_scale : arm_.action_joint_scale;
    const double a = std::clamp(action.delta[j], -1.0, 1.0);
    double t = state.joint_targets[j] + scale * a;
    const double lo = grip ? 0.0 : arm_.joint_limit_lo[j];
    const double hi = grip ? arm_.gripper_max_aperture : arm_.joint_limit_hi[j];
    state.joint_targets[j] = std::clamp(t, lo, hi);
  }

  state.finger_impulse = {0.0, 0.0};

  // Disturbance process runs once per control step, only while grasped.
  if (state.is_grasped && mode_ != WorldMode::none) {
    update_disturbance(state, dist_, mass_, rng);
  }

  const double dt = 1.0 / arm_.sim_hz;
  const int n_sub = arm_.substeps();
  GripperFrame prev_frame = gripper_frame(state);
  for (int sub = 0; sub < n_sub; ++sub) {
    const std::vector<double> saved_pos = state.joint_pos;
    const std::vector<double> saved_vel = state.joint_vel;
    integrate_joints(state, dt);

    if (state.is_grasped) {
      const GripperFrame f = gripper_frame(state);
      if (mode_ == WorldMode::lever) {
        const Vec2 r = f.tcp - state.object_pose.p;
        const double bearing = std::atan2(r.y, r.x);
        state.object_pose.theta = std::clamp(
            state.grasp_lever_theta +
                wrap_angle(bearing - state.grasp_tcp_angle),
            lever_theta_min, lever_theta_max);
      } else {
        const Pose2 tcp_pose{f.tcp, f.heading};
        SimState probe = state;
        probe.object_pose.p = tcp_pose.apply(state.grasp_local_pos);
        probe.object_pose.theta =
            wrap_angle(f.heading + state.grasp_local_theta);
        Vec2 mtv;
        if (object_hits_fixture(probe, &mtv)) {
          // Carried object blocked by a fixture: the whole arm motion for
          // this substep is rolled back.
          state.joint_pos = saved_pos;
          state.joint_vel.assign(saved_vel.size(), 0.0);
        } else {
          state.object_pose = probe.object_pose;
        }
      }
      // Grasp break / release rules.
      const SqueezeInfo sq = squeeze_info(state);
      bool release = sq.penetration <= 0.0;
      bool broke = false;
      if (!release) {
        const double hold =
            2.0 * params_.friction * arm_.grip_stiffness * sq.penetration;
        broke = state.residual_force.norm() > hold;
      }
      if (release || broke) {
        state.is_grasped = false;
        const GripperFrame now = gripper_frame(state);
        Vec2 tcp_vel = (now.tcp - prev_frame.tcp) * (1.0 / dt);
        state.object_vel = tcp_vel;
        if (broke) {
          state.object_vel +=
              state.residual_force * ((1.0 / arm_.control_hz) / mass_);
        }
        state.object_omega = 0.0;
        state.residual_force = {0.0, 0.0};  // the kick has been delivered
      }
    } else if (mode_ == WorldMode::free_obj) {
      update_object_free(state, dt);
    } else if (mode_ == WorldMode::lever) {
      update_object_lever(state, dt);
    }

    contacts_and_grasp(state, dt);
    prev_frame = gripper_frame(state);
  }
  state.time_step += 1;
}

}  // namespace planarm::sim
