#include "planarm/tasks/task.hpp"

#include <algorithm>
#include <cmath>

namespace planarm::tasks {

namespace {

void require_finite(std::initializer_list<double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Fault(std::string("non-finite input to ") + what);
  }
}

double fold_half_pi(double a) {
  double e = std::abs(wrap_angle(a));
  if (e > M_PI / 2.0) e = M_PI - e;
  return e;
}

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::reach: return "reach";
    case TaskKind::pick_place: return "pick_place";
    case TaskKind::peg_insert: return "peg_insert";
    case TaskKind::faucet: return "faucet";
  }
  return "?";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "reach") return TaskKind::reach;
  if (s == "pick_place") return TaskKind::pick_place;
  if (s == "peg_insert") return TaskKind::peg_insert;
  if (s == "faucet") return TaskKind::faucet;
  throw Fault("unknown task: " + s);
}

int goal_dim(TaskKind k) {
  Goal g;
  g.kind = k;
  return g.dim();
}

void Goal::assemble(const Vec2& tcp, const Vec2& obj, double theta_current,
                    float* out) const {
  switch (kind) {
    case TaskKind::faucet:
      out[0] = static_cast<float>(theta_goal);
      out[1] = static_cast<float>(theta_goal - theta_current);
      break;
    case TaskKind::peg_insert:
      out[0] = static_cast<float>(pos.x);
      out[1] = static_cast<float>(pos.y);
      out[2] = static_cast<float>(std::cos(hole_angle));
      out[3] = static_cast<float>(std::sin(hole_angle));
      out[4] = static_cast<float>(pos.x - tcp.x);
      out[5] = static_cast<float>(pos.y - tcp.y);
      out[6] = static_cast<float>(pos.x - obj.x);
      out[7] = static_cast<float>(pos.y - obj.y);
      break;
    default:  // pick_place and reach share the positional layout
      out[0] = static_cast<float>(pos.x);
      out[1] = static_cast<float>(pos.y);
      out[2] = static_cast<float>(pos.x - tcp.x);
      out[3] = static_cast<float>(pos.y - tcp.y);
      out[4] = static_cast<float>(pos.x - obj.x);
      out[5] = static_cast<float>(pos.y - obj.y);
      break;
  }
}

double reward_pick_place(double dist_tcp_obj, double bbox_norm, bool grasped,
                         double dist_obj_goal, bool success) {
  require_finite({dist_tcp_obj, bbox_norm, dist_obj_goal}, "reward_pick_place");
  if (success) return 10.0;
  const double delta = std::max(dist_tcp_obj - bbox_norm, 0.0);
  return 1.0 - std::tanh(3.0 * delta) + 3.0 * (grasped ? 1.0 : 0.0) +
         3.0 * (1.0 - std::tanh(3.0 * dist_obj_goal));
}

double reward_peg(double dist_tcp_obj, double bbox_norm, bool grasped,
                  double align_err, double dist_obj_goal, bool success) {
  require_finite({dist_tcp_obj, bbox_norm, align_err, dist_obj_goal},
                 "reward_peg");
  if (success) return 10.0;
  const double delta = std::max(dist_tcp_obj - bbox_norm, 0.0);
  return 1.0 - std::tanh(3.0 * delta) + 3.0 * (grasped ? 1.0 : 0.0) +
         (1.0 - std::tanh(3.0 * align_err)) +
         3.0 * (1.0 - std::tanh(3.0 * dist_obj_goal));
}

double reward_faucet(double dist_tcp_handle, double handle_margin,
                     double theta_remaining, bool success) {
  require_finite({dist_tcp_handle, handle_margin, theta_remaining},
                 "reward_faucet");
  if (success) return 10.0;
  const double delta = std::max(dist_tcp_handle - handle_margin, 0.0);
  return 1.0 - std::tanh(3.0 * delta) +
         3.0 * (1.0 - std::tanh(3.0 * std::abs(theta_remaining)));
}

TaskEnv::TaskEnv(EnvConfig cfg, const ObjectLibrary* library, uint64_t seed)
    : cfg_(std::move(cfg)), library_(library), rng_(seed) {
  if (!library_ || library_->size() == 0) throw Fault("TaskEnv: empty library");
  sim::WorldMode mode = sim::WorldMode::free_obj;
  if (cfg_.kind == TaskKind::reach) mode = sim::WorldMode::none;
  if (cfg_.kind == TaskKind::faucet) mode = sim::WorldMode::lever;
  world_ = sim::World(cfg_.arm, mode);
}

void TaskEnv::reset(sim::EnvParams params, const sense::NoiseSpec& noise) {
  noise_ = noise;
  const Instance& inst = library_->at(params.instance_id);

  sim::ObjectModel model;
  model.verts = inst.verts;
  model.mass = inst.mass;
  model.bbox_half = inst.bbox_half;
  model.handle = inst.handle;

  goal_.kind = cfg_.kind;
  episode_steps_ = 0;
  static_scene_ = {};
  world_.set_fixtures({});

  const double reach = cfg_.arm.reach();
  auto sample_annulus = [&](double lo, double hi) {
    const double r = rng_.uniform(lo, hi) * std::min(1.0, reach / 0.9);
    const double a = rng_.uniform(-M_PI, M_PI);
    return Vec2{r * std::cos(a), r * std::sin(a)};
  };

  Pose2 obj_pose;
  switch (cfg_.kind) {
    case TaskKind::reach: {
      goal_.pos = sample_annulus(cfg_.goal_r_lo, cfg_.goal_r_hi);
      obj_pose.p = goal_.pos;  // marker only; no interaction in this mode
      params.task_slot = {0.0, 0.0};
      break;
    }
    case TaskKind::pick_place: {
      obj_pose.p = sample_annulus(cfg_.spawn_r_lo, cfg_.spawn_r_hi);
      obj_pose.theta = rng_.uniform(-M_PI, M_PI);
      do {
        goal_.pos = sample_annulus(cfg_.goal_r_lo, cfg_.goal_r_hi);
      } while ((goal_.pos - obj_pose.p).norm() < cfg_.min_obj_goal_sep);
      params.task_slot = {inst.bbox_half.x * params.scale_mult,
                          inst.bbox_half.y * params.scale_mult};
      break;
    }
    case TaskKind::peg_insert: {
      const double peg_w = 2.0 * std::min(inst.bbox_half.x, inst.bbox_half.y) *
                           params.scale_mult;
      slot_width_ = peg_w + cfg_.peg_clearance * params.scale_mult;
      // Hole center with the insertion axis tilted off the radial direction.
      const double hr = rng_.uniform(0.40, 0.68);
      const double ha = rng_.uniform(-M_PI, M_PI);
      goal_.pos = {hr * std::cos(ha), hr * std::sin(ha)};
      goal_.hole_angle = ha + rng_.uniform(-0.5, 0.5);
      const Vec2 u{std::cos(goal_.hole_angle), std::sin(goal_.hole_angle)};
      const Vec2 l = u.perp();
      auto wall = [&](double from, double to) {
        std::vector<Vec2> w;
        const double d = cfg_.slot_depth / 2.0;
        w.push_back(goal_.pos + l * from - u * d);
        w.push_back(goal_.pos + l * to - u * d);
        w.push_back(goal_.pos + l * to + u * d);
        w.push_back(goal_.pos + l * from + u * d);
        if (Polygon{w}.area() < 0.0) std::reverse(w.begin(), w.end());
        return w;
      };
      world_.set_fixtures({wall(slot_width_ / 2.0, 0.20),
                           wall(-0.20, -slot_width_ / 2.0)});
      for (int tries = 0; tries < 64; ++tries) {
        obj_pose.p = sample_annulus(cfg_.spawn_r_lo, cfg_.spawn_r_hi);
        obj_pose.theta = rng_.uniform(-M_PI, M_PI);
        if ((obj_pose.p - goal_.pos).norm() < cfg_.min_obj_goal_sep) continue;
        sim::World probe(cfg_.arm, sim::WorldMode::free_obj);
        probe.set_object(model, params);
        probe.set_fixtures(world_.fixtures());
        sim::SimState s = probe.make_state(cfg_.home, obj_pose);
        Vec2 mtv;
        bool hit = false;
        for (const auto& fx : world_.fixtures()) {
          hit = hit || convex_overlap_mtv(probe.object_world_verts(s), fx, &mtv);
        }
        if (!hit) break;
      }
      params.task_slot = {inst.bbox_half.x * params.scale_mult,
                          inst.bbox_half.y * params.scale_mult};
      break;
    }
    case TaskKind::faucet: {
      // Pivot placed so the handle stays reachable for any lever angle.
      const double lever_len =
          (inst.handle.norm() + 0.04) * params.scale_mult;
      Vec2 pivot;
      double base = 0.0;
      for (int tries = 0; tries < 64; ++tries) {
        pivot = sample_annulus(0.35, 0.62);
        base = rng_.uniform(-M_PI, M_PI);
        const Vec2 handle_w =
            pivot + (inst.handle * params.scale_mult).rotated(base);
        if (handle_w.norm() < reach * 0.92 &&
            handle_w.norm() > 0.18 && pivot.norm() + lever_len < reach)
          break;
      }
      // Bake the base orientation into the model so the lever angle starts
      // at zero.
      for (Vec2& v : model.verts) v = v.rotated(base);
      model.handle = model.handle.rotated(base);
      obj_pose.p = pivot;
      obj_pose.theta = 0.0;
      goal_.theta_goal = rng_.uniform(cfg_.faucet_goal_lo, cfg_.faucet_goal_hi);
      params.task_slot = {pivot.x, pivot.y};
      break;
    }
  }

  world_.set_object(model, params);
  sim::DisturbanceSpec dist;
  dist.prob = params.disturb_prob;
  world_.set_disturbance(dist);
  state_ = world_.make_state(cfg_.home, obj_pose);
  build_scene();
  obs_ = sense::observe(world_, state_, noise_, rng_);
}

void TaskEnv::build_scene() {
  static_scene_.polygons.clear();
  static_scene_.segments.clear();
  for (const auto& fx : world_.fixtures()) static_scene_.polygons.push_back(fx);
  if (cfg_.kind == TaskKind::faucet) {
    // Pivot post.
    const Vec2 p = state_.object_pose.p;
    const double s = 0.012;
    static_scene_.polygons.push_back(
        {{p.x - s, p.y - s}, {p.x + s, p.y - s}, {p.x + s, p.y + s},
         {p.x - s, p.y + s}});
  }
  const double b = 1.0;  // table boundary
  const Vec2 c0{-b, -b}, c1{b, -b}, c2{b, b}, c3{-b, b};
  static_scene_.segments = {{c0, c1}, {c1, c2}, {c2, c3}, {c3, c0}};
}

sense::DepthScan TaskEnv::scan() const {
  sense::Scene scene = static_scene_;
  if (world_.mode() != sim::WorldMode::none) {
    scene.polygons.push_back(world_.object_world_verts(state_));
  }
  return sense::render_depth(world_, state_, scene, cfg_.depth);
}

std::vector<float> TaskEnv::goal_vec() const {
  std::vector<float> g(goal_.dim());
  goal_.assemble(obs_.tcp(), obs_.object_pos(), state_.object_pose.theta,
                 g.data());
  return g;
}

double TaskEnv::max_joint_speed() const {
  double m = 0.0;
  for (double v : state_.joint_vel) m = std::max(m, std::abs(v));
  return m;
}

double TaskEnv::dist_tcp_obj() const {
  const sim::GripperFrame f = world_.gripper_frame(state_);
  return (f.tcp - world_.object_anchor(state_)).norm();
}

double TaskEnv::dist_obj_goal() const {
  return (world_.object_anchor(state_) - goal_.pos).norm();
}

bool TaskEnv::success_now() const {
  switch (cfg_.kind) {
    case TaskKind::reach: {
      const sim::GripperFrame f = world_.gripper_frame(state_);
      return (f.tcp - goal_.pos).norm() <= cfg_.success_tol &&
             max_joint_speed() < cfg_.static_speed;
    }
    case TaskKind::pick_place:
      return dist_obj_goal() <= cfg_.success_tol &&
             max_joint_speed() < cfg_.static_speed;
    case TaskKind::peg_insert: {
      if (state_.is_grasped) return false;
      const Vec2 u{std::cos(goal_.hole_angle), std::sin(goal_.hole_angle)};
      const Vec2 l = u.perp();
      const double lat = (state_.object_pose.p - goal_.pos).dot(l);
      if (std::abs(lat) > slot_width_ / 2.0) return false;
      double max_depth = -1e9;
      for (const Vec2& v : world_.object_world_verts(state_)) {
        max_depth = std::max(max_depth, (v - goal_.pos).dot(u));
      }
      const double inserted = max_depth + cfg_.slot_depth / 2.0;
      const double peg_len = 2.0 * std::max(world_.object_model().bbox_half.x,
                                            world_.object_model().bbox_half.y) *
                             world_.object_scale();
      return inserted >= 0.5 * peg_len;
    }
    case TaskKind::faucet:
      return state_.object_pose.theta >= goal_.theta_goal;
  }
  return false;
}

double TaskEnv::reward_now() const {
  const bool succ = success_now();
  const double bbox = world_.object_model().bbox_norm() * world_.object_scale();
  switch (cfg_.kind) {
    case TaskKind::reach: {
      const sim::GripperFrame f = world_.gripper_frame(state_);
      const double d = (f.tcp - goal_.pos).norm();
      return succ ? 10.0 : 1.0 - std::tanh(3.0 * d);
    }
    case TaskKind::pick_place:
      return reward_pick_place(dist_tcp_obj(), bbox, state_.is_grasped,
                               dist_obj_goal(), succ);
    case TaskKind::peg_insert: {
      const double align = fold_half_pi(state_.object_pose.theta -
                                        goal_.hole_angle);
      return reward_peg(dist_tcp_obj(), bbox, state_.is_grasped, align,
                        dist_obj_goal(), succ);
    }
    case TaskKind::faucet: {
      const double margin = 0.025 * world_.object_scale();
      return reward_faucet(dist_tcp_obj(), margin,
                           goal_.theta_goal - state_.object_pose.theta, succ);
    }
  }
  return 0.0;
}

TaskEnv::StepOut TaskEnv::step(const std::vector<double>& action) {
  sim::Action a{action};
  world_.step(state_, a, rng_);
  ++episode_steps_;
  obs_ = sense::observe(world_, state_, noise_, rng_);
  StepOut out;
  out.success = success_now();
  out.reward = reward_now();
  return out;
}

}  // namespace planarm::tasks
