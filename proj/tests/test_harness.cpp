#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "planarm/eval/audit.hpp"
#include "planarm/eval/evaluate.hpp"

using namespace planarm;
using namespace planarm::eval;

namespace {

io::RunConfig tiny_cfg() {
  io::RunConfig cfg;
  cfg.task = "pick_place";
  cfg.net.policy_hidden = 16;
  cfg.net.encoder_hidden = 16;
  cfg.library.per_category = 4;
  cfg.library.held_out_total = 12;
  return cfg;
}

void zero_policy(Agent& agent) {
  // Zeroing the mean head makes the policy emit exactly zero actions.
  for (auto* b : agent.policy().blobs()) {
    if (b->name.rfind("pi.mean", 0) == 0) {
      std::fill(b->val.begin(), b->val.end(), 0.0f);
    }
  }
}

}  // namespace

TEST_CASE("an agent that never moves scores SR 0 and EL exactly 200") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary lib =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  Agent agent(AgentVariant::dr, cfg, &lib, 1);
  zero_policy(agent);
  EvalRun run;
  run.episodes = 10;
  run.max_steps = 200;
  run.seeds = {1, 2};
  const EvalReport report =
      evaluate(agent, cfg, lib, rnd::widen_for_test(cfg.rand), run);
  CHECK(report.sr_mean == 0.0);
  CHECK(report.el_mean == 200.0);
  CHECK(report.privileged_reads == 0);
}

TEST_CASE("evaluation is deterministic given seeds") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary lib =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  auto run_once = [&] {
    Agent agent(AgentVariant::dr, cfg, &lib, 7);
    EvalRun run;
    run.episodes = 6;
    run.max_steps = 50;
    run.seeds = {11, 22};
    return evaluate(agent, cfg, lib, rnd::widen_for_test(cfg.rand), run)
        .to_json()
        .dump();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("deployable variants perform zero privileged reads") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary lib =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  EvalRun run;
  run.episodes = 3;
  run.max_steps = 30;
  run.seeds = {5};
  const auto spec = rnd::widen_for_test(cfg.rand);
  for (AgentVariant v : {AgentVariant::rma2, AgentVariant::nova,
                         AgentVariant::nooe, AgentVariant::dr,
                         AgentVariant::dr_vi, AgentVariant::adr}) {
    Agent agent(v, cfg, &lib, 2);
    const EvalReport report = evaluate(agent, cfg, lib, spec, run);
    CHECK(report.privileged_reads == 0);
  }
}

TEST_CASE("the oracle does read privileged inputs") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary lib =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  Agent agent(AgentVariant::oracle, cfg, &lib, 3);
  EvalRun run;
  run.episodes = 2;
  run.max_steps = 20;
  run.seeds = {5};
  PrivilegedAudit::Scope scope;
  evaluate(agent, cfg, lib, rnd::widen_for_test(cfg.rand), run);
  CHECK(PrivilegedAudit::reads() > 0);
}

TEST_CASE("oracle on a held-out library faults") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary train =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  const tasks::ObjectLibrary held =
      tasks::make_pick_library(tasks::Split::held_out, 4,
                               cfg.library.library_seed);
  Agent agent(AgentVariant::oracle, cfg, &train, 4);
  EvalRun run;
  run.episodes = 1;
  run.seeds = {1};
  CHECK_THROWS_AS(
      evaluate(agent, cfg, held, rnd::widen_for_test(cfg.rand), run), Fault);
}

TEST_CASE("EL is bounded by the cap and success implies an earlier stop") {
  io::RunConfig cfg = tiny_cfg();
  cfg.task = "reach";
  const tasks::ObjectLibrary lib = tasks::make_reach_library();
  Agent agent(AgentVariant::dr, cfg, &lib, 5);
  EvalRun run;
  run.episodes = 10;
  run.max_steps = 40;
  run.seeds = {9};
  const EvalReport r = evaluate(agent, cfg, lib, rnd::widen_for_test(cfg.rand),
                                run);
  CHECK(r.sr_mean >= 0.0);
  CHECK(r.sr_mean <= 1.0);
  CHECK(r.el_mean >= 1.0);
  CHECK(r.el_mean <= 40.0);
}

TEST_CASE("heatmap grid: all-success gives 1.0 in every populated cell") {
  std::vector<tasks::ComplexityScore> scores;
  std::vector<double> srs;
  Rng rng(6);
  for (int i = 0; i < 40; ++i) {
    scores.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0)});
    srs.push_back(1.0);
  }
  const std::string csv = eval::heatmap_grid_csv(scores, srs);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // comment header
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      ++cols;
      if (!cell.empty()) CHECK(std::stod(cell) == 1.0);
    }
    CHECK(cols >= 1);
  }
  CHECK(rows == 5);
}

TEST_CASE("heatmap grid: unpopulated buckets are empty fields, not zeros") {
  // Two tight clusters leave most of the 5x5 grid unpopulated.
  std::vector<tasks::ComplexityScore> scores;
  std::vector<double> srs;
  for (int i = 0; i < 10; ++i) {
    scores.push_back({0.01 * i, 0.001 * i});
    srs.push_back(0.5);
  }
  const std::string csv = eval::heatmap_grid_csv(scores, srs);
  CHECK(csv.find(",,") != std::string::npos);
}

TEST_CASE("rma2 agent requires a matching teacher digest") {
  io::RunConfig cfg = tiny_cfg();
  const tasks::ObjectLibrary lib =
      tasks::make_pick_library(tasks::Split::train, cfg.library.per_category,
                               cfg.library.library_seed);
  // Capture a phase-1 checkpoint from a fresh agent's weights.
  Agent source(AgentVariant::oracle, cfg, &lib, 6);
  std::vector<nn::Blob<float>*> blobs = source.policy().blobs();
  for (auto* b : source.encoder()->blobs()) blobs.push_back(b);
  io::Checkpoint phase1 = io::Checkpoint::capture("phase1:teacher", cfg.digest(), blobs);

  Agent student(AgentVariant::rma2, cfg, &lib, 7);
  io::Checkpoint phase2 =
      io::Checkpoint::capture("phase2:rma2", cfg.digest(),
                              student.adapter()->blobs());
  phase2.teacher_digest = phase1.payload_digest();
  student.load(phase1, &phase2);  // matching digests load fine

  phase2.teacher_digest = "deadbeefdeadbeef";
  CHECK_THROWS_AS(student.load(phase1, &phase2), Fault);
}
