#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "planarm/sim/world.hpp"

using namespace planarm;
using namespace planarm::sim;

namespace {

ObjectModel small_box(double w = 0.04, double h = 0.03) {
  ObjectModel m;
  m.verts = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
  m.mass = 0.1;
  m.bbox_half = {w / 2, h / 2};
  return m;
}

// Arm stretched along +x: palm at (0.9, 0), tcp at (0.92, 0), heading 0.
const std::vector<double> kStraight{0.0, 0.0, 0.0, 0.0};

World make_world(const EnvParams& params, WorldMode mode = WorldMode::free_obj,
                 const ObjectModel& model = small_box()) {
  World w(ArmConfig{}, mode);
  w.set_object(model, params);
  return w;
}

Action zero_action() { return Action{std::vector<double>(5, 0.0)}; }

}  // namespace

TEST_CASE("substep count equals sim_hz / control_hz") {
  ArmConfig arm;
  CHECK(arm.substeps() == 6);
  arm.sim_hz = 60;
  CHECK(arm.substeps() == 3);
  arm.sim_hz = 119;
  CHECK_THROWS_AS(arm.validate(), Fault);
}

TEST_CASE("PD at the setpoint is a fixed point") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state({0.3, -0.4, 0.5, 0.2}, Pose2{{5, 5}, 0});
  const std::vector<double> q0 = s.joint_pos;
  Rng rng(1);
  for (int i = 0; i < 10; ++i) w.step(s, zero_action(), rng);
  for (int j = 0; j < 5; ++j)
    CHECK(std::abs(s.joint_pos[j] - q0[j]) < 1e-9);
  CHECK(s.time_step == 10);
}

TEST_CASE("first-substep PD torque equals kp at unit error") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  s.joint_targets[0] = 1.0;  // q = 0, qdot = 0
  CHECK(w.pd_torque(s, 0) == doctest::Approx(4.0).epsilon(1e-12));
  s.joint_vel[0] = 2.0;
  CHECK(w.pd_torque(s, 0) == doctest::Approx(4.0 - 0.2 * 2.0));
}

TEST_CASE("disturbance residual decays by exactly 0.8 between samples") {
  EnvParams p;
  p.force_scale = 1.0;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  s.residual_force = {1.0, 0.0};
  DisturbanceSpec spec;
  spec.prob = 0.0;  // never resample
  Rng rng(3);
  w.update_disturbance(s, spec, 0.1, rng);
  CHECK(s.residual_force.x == 0.8);
  w.update_disturbance(s, spec, 0.1, rng);
  CHECK(s.residual_force.x == 0.8 * 0.8);
  CHECK(s.residual_force.y == 0.0);
}

TEST_CASE("fresh disturbance directions are unit norm") {
  EnvParams p;
  p.force_scale = 1.0;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  DisturbanceSpec spec;
  spec.prob = 1.0;  // always resample
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 f = w.update_disturbance(s, spec, 1.0, rng);
    CHECK(std::abs(f.norm() - 1.0) < 1e-9);  // mass 1 x force_scale 1
  }
}

TEST_CASE("zero probability and zero residual stay exactly zero") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  DisturbanceSpec spec;
  spec.prob = 0.0;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec2 f = w.update_disturbance(s, spec, 0.1, rng);
    CHECK(f.x == 0.0);
    CHECK(f.y == 0.0);
  }
}

TEST_CASE("one finger contact does not grasp") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{0.92, 0.03}, 0});
  s.joint_pos.back() = 0.028;
  s.joint_targets.back() = 0.0;  // closing
  const auto r = w.grasp_check(s, p);
  CHECK_FALSE(r.is_grasped);
}

TEST_CASE("straddled object with squeeze and both contacts grasps") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{0.92, 0.0}, 0});
  s.joint_pos.back() = 0.028;   // box height 0.03 across the fingers
  s.joint_targets.back() = 0.0;  // squeezing
  const auto r = w.grasp_check(s, p);
  CHECK(r.is_grasped);
  CHECK(r.finger_impulse[0] > 0.0);
  CHECK(r.finger_impulse[0] == r.finger_impulse[1]);
}

TEST_CASE("grasp persists below hold force and breaks above") {
  EnvParams p;
  p.friction = 0.8;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{0.92, 0.0}, 0});
  s.joint_pos.back() = 0.028;
  s.joint_targets.back() = 0.0;
  s.is_grasped = true;
  const double hold = w.hold_force(s, p);
  // hold = 2 * friction * stiffness * (0.03 - 0.028)
  CHECK(hold == doctest::Approx(2.0 * 0.8 * 100.0 * 0.002).epsilon(1e-9));
  s.residual_force = {hold * 0.9, 0.0};
  CHECK(w.grasp_check(s, p).is_grasped);
  s.residual_force = {hold * 1.1, 0.0};
  CHECK_FALSE(w.grasp_check(s, p).is_grasped);
}

TEST_CASE("zero friction means any disturbance breaks the grasp") {
  EnvParams p;
  p.friction = 0.0;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{0.92, 0.0}, 0});
  s.joint_pos.back() = 0.028;
  s.joint_targets.back() = 0.0;
  s.is_grasped = true;
  CHECK(w.hold_force(s, p) == 0.0);
  s.residual_force = {1e-6, 0.0};
  CHECK_FALSE(w.grasp_check(s, p).is_grasped);
}

TEST_CASE("stepping is bitwise deterministic") {
  auto run = [] {
    EnvParams p;
    p.friction = 0.7;
    p.force_scale = 1.5;
    p.disturb_prob = 0.3;
    World w = make_world(p);
    SimState s = w.make_state({0.1, 0.5, 0.4, -0.2}, Pose2{{0.4, 0.2}, 0.3});
    Rng rng(99);
    Rng act_rng(123);
    std::vector<double> trace;
    for (int t = 0; t < 40; ++t) {
      Action a{std::vector<double>(5)};
      for (auto& v : a.delta) v = act_rng.uniform(-1.0, 1.0);
      w.step(s, a, rng);
      for (double q : s.joint_pos) trace.push_back(q);
      trace.push_back(s.object_pose.p.x);
      trace.push_back(s.object_pose.p.y);
      trace.push_back(s.object_pose.theta);
    }
    return trace;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("joint speeds decay monotonically under PD damping") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state({0.2, 0.3, -0.1, 0.4}, Pose2{{5, 5}, 0});
  for (int j = 0; j < 4; ++j) s.joint_vel[j] = 0.5;
  Rng rng(7);
  double prev = 1e9;
  for (int t = 0; t < 20; ++t) {
    w.step(s, zero_action(), rng);
    double mx = 0.0;
    for (int j = 0; j < 4; ++j) mx = std::max(mx, std::abs(s.joint_vel[j]));
    CHECK(mx <= prev + 1e-12);
    prev = mx;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("no contact means zero accumulated impulse") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{-5, -5}, 0});
  Rng rng(8);
  double total = 0.0;
  for (int t = 0; t < 50; ++t) {
    Action a{std::vector<double>{0.2, -0.1, 0.1, 0.05, -0.5}};
    w.step(s, a, rng);
    total += s.finger_impulse[0] + s.finger_impulse[1];
    CHECK_FALSE(s.finger_contact[0]);
    CHECK_FALSE(s.finger_contact[1]);
  }
  CHECK(total == 0.0);
}

TEST_CASE("joint limits clamp instead of faulting") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    Action a{std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0}};
    w.step(s, a, rng);
  }
  const ArmConfig arm;
  for (int j = 0; j < 4; ++j) {
    CHECK(s.joint_pos[j] <= arm.joint_limit_hi[j]);
    CHECK(s.joint_pos[j] >= arm.joint_limit_lo[j]);
  }
  CHECK(s.joint_pos.back() <= arm.gripper_max_aperture);
}

TEST_CASE("non-finite action faults with a diagnostic") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  Rng rng(10);
  Action a{std::vector<double>{0.0, 0.0, std::nan(""), 0.0, 0.0}};
  CHECK_THROWS_AS(w.step(s, a, rng), Fault);
  s = w.make_state(kStraight, Pose2{{5, 5}, 0});
  s.joint_pos[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(w.step(s, zero_action(), rng), Fault);
}

TEST_CASE("carried object follows the gripper while grasped") {
  EnvParams p;
  World w = make_world(p);
  SimState s = w.make_state(kStraight, Pose2{{0.92, 0.0}, 0});
  s.joint_pos.back() = 0.028;
  s.joint_targets.back() = 0.0;
  Rng rng(11);
  w.step(s, zero_action(), rng);
  REQUIRE(s.is_grasped);
  const Vec2 before = s.object_pose.p;
  const GripperFrame f0 = w.gripper_frame(s);
  Action a{std::vector<double>{0.5, 0.0, 0.0, 0.0, -1.0}};
  for (int t = 0; t < 10; ++t) w.step(s, a, rng);
  REQUIRE(s.is_grasped);
  const GripperFrame f1 = w.gripper_frame(s);
  const Vec2 moved = s.object_pose.p - before;
  const Vec2 tcp_moved = f1.tcp - f0.tcp;
  CHECK((moved - tcp_moved).norm() < 1e-6);
  CHECK(moved.norm() > 0.01);
}
