#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "planarm/adapt/adapter.hpp"
#include "planarm/eval/evaluate.hpp"
#include "planarm/io/config.hpp"
#include "planarm/rl/gae.hpp"
#include "planarm/rl/trainer.hpp"
#include "planarm/rnd/randomization.hpp"
#include "planarm/tasks/task.hpp"

namespace py = pybind11;
using namespace planarm;

namespace {

tasks::ObjectLibrary build_library_py(const io::RunConfig& cfg,
                                      const std::string& task, bool held_out) {
  const tasks::TaskKind kind = tasks::task_from_string(task);
  switch (kind) {
    case tasks::TaskKind::reach:
      return tasks::make_reach_library();
    case tasks::TaskKind::pick_place:
      return held_out
                 ? tasks::make_pick_library(tasks::Split::held_out,
                                            (cfg.library.held_out_total + 5) / 6,
                                            cfg.library.library_seed)
                 : tasks::make_pick_library(tasks::Split::train,
                                            cfg.library.per_category,
                                            cfg.library.library_seed);
    case tasks::TaskKind::peg_insert:
      return tasks::make_peg_library(cfg.library.peg_count,
                                     cfg.library.library_seed);
    case tasks::TaskKind::faucet:
      return tasks::make_faucet_library(cfg.library.faucet_count,
                                        cfg.library.library_seed);
  }
  throw Fault("unhandled task");
}

// Episodic environment handle for python: owns the library, env, and the
// randomization stream.
class PyEnv {
 public:
  PyEnv(const std::string& task, uint64_t seed, bool held_out)
      : cfg_(), library_(std::make_shared<tasks::ObjectLibrary>(
                    build_library_py(cfg_, task, held_out))) {
    cfg_.task = task;
    tasks::EnvConfig ec;
    ec.kind = tasks::task_from_string(task);
    ec.arm = cfg_.arm;
    ec.depth = cfg_.depth;
    env_ = std::make_unique<tasks::TaskEnv>(ec, library_.get(),
                                            Rng::derive(seed, 17));
    spec_ = cfg_.rand;
  }

  void set_test_widening(bool widen) {
    spec_ = widen ? rnd::widen_for_test(cfg_.rand) : cfg_.rand;
  }

  py::dict reset() {
    const rnd::CurriculumState full = rnd::CurriculumState::full();
    const sim::EnvParams p =
        rnd::sample_env(spec_, full, *library_, env_->rng());
    env_->reset(p, rnd::noise_at(spec_, full));
    return observation_dict(0.0, false);
  }

  py::dict step(const std::vector<double>& action) {
    const tasks::TaskEnv::StepOut out = env_->step(action);
    return observation_dict(out.reward, out.success);
  }

  py::array_t<float> depth_scan() {
    const sense::DepthScan scan = env_->scan();
    return py::array_t<float>(static_cast<py::ssize_t>(scan.depths.size()),
                              scan.depths.data());
  }

  int action_dim() const { return cfg_.arm.num_joints + 1; }

 private:
  py::dict observation_dict(double reward, bool success) {
    py::dict d;
    const auto& obs = env_->observation().v;
    d["observation"] = py::array_t<float>(static_cast<py::ssize_t>(obs.size()),
                                          obs.data());
    const std::vector<float> goal = env_->goal_vec();
    d["goal"] = py::array_t<float>(static_cast<py::ssize_t>(goal.size()),
                                   goal.data());
    d["reward"] = reward;
    d["success"] = success;
    d["is_grasped"] = env_->state().is_grasped;
    d["time_step"] = env_->state().time_step;
    return d;
  }

  io::RunConfig cfg_;
  std::shared_ptr<tasks::ObjectLibrary> library_;
  std::unique_ptr<tasks::TaskEnv> env_;
  rnd::RandomizationSpec spec_;
};

}  // namespace

PYBIND11_MODULE(_planarm, m) {
  m.doc() = "planar-arm manipulation simulator and adaptive-policy stack";

  m.def("reward_pick_place", &tasks::reward_pick_place, py::arg("dist_tcp_obj"),
        py::arg("bbox_norm"), py::arg("grasped"), py::arg("dist_obj_goal"),
        py::arg("success"));
  m.def("reward_peg", &tasks::reward_peg);
  m.def("reward_faucet", &tasks::reward_faucet);

  m.def(
      "gae",
      [](const std::vector<float>& r, const std::vector<float>& v,
         const std::vector<uint8_t>& done, float v_tail, double gamma,
         double lam) { return rl::gae(r, v, done, v_tail, gamma, lam); },
      py::arg("rewards"), py::arg("values"), py::arg("dones"),
      py::arg("v_tail") = 0.0f, py::arg("gamma") = 0.95,
      py::arg("lam") = 0.95);

  m.def("widened_test_ranges", [] {
    rnd::RandomizationSpec spec;
    const rnd::RandomizationSpec w = rnd::widen_for_test(spec);
    py::dict d;
    d["scale"] = py::make_tuple(w.scale.lo, w.scale.hi);
    d["density"] = py::make_tuple(w.density.lo, w.density.hi);
    d["friction"] = py::make_tuple(w.friction.lo, w.friction.hi);
    d["force_scale"] = py::make_tuple(w.force_scale.lo, w.force_scale.hi);
    d["obj_pos_noise"] = w.obj_pos_noise;
    d["obj_rot_noise_deg"] = w.obj_rot_noise_deg;
    d["joint_pos_noise"] = w.joint_pos_noise;
    return d;
  });

  m.def("score_complexity", [](const std::string& task, int instance,
                               uint64_t library_seed) {
    io::RunConfig cfg;
    cfg.library.library_seed = library_seed;
    const tasks::ObjectLibrary lib = build_library_py(cfg, task, false);
    const tasks::ComplexityScore s = tasks::score_complexity(lib.at(instance));
    return py::make_tuple(s.shape_complexity, s.grasp_difficulty);
  });

  m.def("library_size", [](const std::string& task, bool held_out) {
    io::RunConfig cfg;
    return build_library_py(cfg, task, held_out).size();
  });

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const std::string&, uint64_t, bool>(), py::arg("task"),
           py::arg("seed") = 1, py::arg("held_out") = false)
      .def("reset", &PyEnv::reset)
      .def("step", &PyEnv::step, py::arg("action"))
      .def("depth_scan", &PyEnv::depth_scan)
      .def("set_test_widening", &PyEnv::set_test_widening)
      .def_property_readonly("action_dim", &PyEnv::action_dim);
}
