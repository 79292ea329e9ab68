#pragma once

#include <array>
#include <string>
#include <vector>

#include "planarm/rng.hpp"
#include "planarm/sense/sense.hpp"
#include "planarm/sim/types.hpp"
#include "planarm/tasks/library.hpp"

namespace planarm::rnd {

struct Range {
  double lo = 0.0, hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double half() const { return 0.5 * (hi - lo); }
};

// Domain-randomization ranges. Training defaults follow the environment
// randomization summary; test mode applies the widening rule exactly once.
struct RandomizationSpec {
  enum class Mode { train, test };

  Range scale{0.70, 1.20};
  Range density{0.50, 5.00};
  Range friction{0.50, 1.10};
  Range force_scale{0.00, 2.00};
  double obj_pos_noise = 0.005;      // m (+/- bound)
  double obj_rot_noise_deg = 10.0;   // deg
  double joint_pos_noise = 0.005;    // rad
  double disturb_prob = 0.1;         // per control step
  Mode mode = Mode::train;

  void validate() const {
    for (const Range* r : {&scale, &density, &friction, &force_scale}) {
      if (r->lo > r->hi) throw Fault("RandomizationSpec: inverted range");
    }
    if (obj_pos_noise < 0 || obj_rot_noise_deg < 0 || joint_pos_noise < 0)
      throw Fault("RandomizationSpec: negative noise bound");
  }
};

// Environment-variation and disturbance ranges scale low by 0.8 and high by
// 1.2; observation-noise bounds scale by 1.2. Faults when already widened.
RandomizationSpec widen_for_test(const RandomizationSpec& spec);

// Linear curriculum: ramp = min(update_idx / ramp_updates, 1). Ranges shrink
// toward their midpoint at ramp 0; disturbance probability and noise bounds
// ramp up from zero.
struct CurriculumState {
  int ramp_updates = 300;
  double ramp = 0.0;

  void advance(int update_idx) {
    double r = ramp_updates <= 0
                   ? 1.0
                   : std::min(static_cast<double>(update_idx) / ramp_updates, 1.0);
    if (r < ramp) throw Fault("CurriculumState: ramp must be non-decreasing");
    ramp = r;
  }
  static CurriculumState full() { return {0, 1.0}; }
};

// Noise bounds at the current curriculum point.
sense::NoiseSpec noise_at(const RandomizationSpec& spec,
                          const CurriculumState& cur);

// Draws one episode's environment parameters: uniform within the
// curriculum-shrunk ranges, instance uniform over the library.
sim::EnvParams sample_env(const RandomizationSpec& spec,
                          const CurriculumState& cur,
                          const tasks::ObjectLibrary& library, Rng& rng);

// Automatic-domain-randomization controller: per-parameter ranges with
// boundary sampling; boundary success-rate buffers expand or contract the
// range. Ranges are clamped to the test-mode outer bounds.
struct AdrState {
  struct Param {
    std::string name;
    Range current;      // live sampling range
    Range full;         // train-mode range (defines the step size)
    Range outer;        // test-mode clamp
    std::vector<int> lo_buffer, hi_buffer;  // 0/1 episode successes
  };
  std::vector<Param> params;
  double sr_hi = 0.7;
  double sr_lo = 0.3;
  double step_frac = 0.05;       // of the full range width
  double boundary_prob = 0.5;
  int buffer_size = 128;

  // Which parameter/boundary an episode pinned, if any.
  struct BoundaryTag {
    int param = -1;
    bool high = false;
  };
};

AdrState make_adr(const RandomizationSpec& train_spec, double init_frac = 0.1);

// Sample with boundary pinning; `tag` reports which boundary (if any) was
// sampled for credit assignment.
sim::EnvParams adr_sample(const AdrState& adr, const RandomizationSpec& spec,
                          const tasks::ObjectLibrary& library, Rng& rng,
                          AdrState::BoundaryTag* tag);

// Pushes an episode result into the pinned boundary's buffer; a full buffer
// moves that boundary by one step (outward on success rate >= sr_hi, inward
// on <= sr_lo) and clears.
void adr_update(AdrState& adr, AdrState::BoundaryTag tag, bool success);

}  // namespace planarm::rnd
