#include "planarm/rnd/randomization.hpp"

#include <algorithm>
#include <cmath>

namespace planarm::rnd {

RandomizationSpec widen_for_test(const RandomizationSpec& spec) {
  spec.validate();
  if (spec.mode == RandomizationSpec::Mode::test)
    throw Fault("widen_for_test: spec is already test-widened");
  RandomizationSpec out = spec;
  for (Range* r : {&out.scale, &out.density, &out.friction, &out.force_scale}) {
    r->lo *= 0.8;
    r->hi *= 1.2;
  }
  out.obj_pos_noise *= 1.2;
  out.obj_rot_noise_deg *= 1.2;
  out.joint_pos_noise *= 1.2;
  out.mode = RandomizationSpec::Mode::test;
  return out;
}

sense::NoiseSpec noise_at(const RandomizationSpec& spec,
                          const CurriculumState& cur) {
  sense::NoiseSpec n;
  n.obj_pos_bound = cur.ramp * spec.obj_pos_noise;
  n.obj_rot_bound_deg = cur.ramp * spec.obj_rot_noise_deg;
  n.joint_pos_bound = cur.ramp * spec.joint_pos_noise;
  return n;
}

sim::EnvParams sample_env(const RandomizationSpec& spec,
                          const CurriculumState& cur,
                          const tasks::ObjectLibrary& library, Rng& rng) {
  spec.validate();
  if (library.size() == 0) throw Fault("sample_env: empty object library");
  auto draw = [&](const Range& r) {
    const double half = cur.ramp * r.half();
    return rng.uniform(r.mid() - half, r.mid() + half);
  };
  sim::EnvParams p;
  p.scale_mult = draw(spec.scale);
  p.density_mult = draw(spec.density);
  p.friction = draw(spec.friction);
  p.force_scale = draw(spec.force_scale);
  p.disturb_prob = cur.ramp * spec.disturb_prob;
  p.instance_id = static_cast<int>(rng.uniform_int(library.size()));
  p.category_id = library.cat(p.instance_id);
  return p;
}

AdrState make_adr(const RandomizationSpec& train_spec, double init_frac) {
  train_spec.validate();
  if (train_spec.mode != RandomizationSpec::Mode::train)
    throw Fault("make_adr: expects a train-mode spec");
  const RandomizationSpec outer = widen_for_test(train_spec);
  AdrState adr;
  auto add = [&](const std::string& name, const Range& full, const Range& out) {
    AdrState::Param p;
    p.name = name;
    p.full = full;
    p.outer = out;
    const double half = init_frac * full.half();
    p.current = {full.mid() - half, full.mid() + half};
    adr.params.push_back(std::move(p));
  };
  add("scale", train_spec.scale, outer.scale);
  add("density", train_spec.density, outer.density);
  add("friction", train_spec.friction, outer.friction);
  add("force_scale", train_spec.force_scale, outer.force_scale);
  return adr;
}

sim::EnvParams adr_sample(const AdrState& adr, const RandomizationSpec& spec,
                          const tasks::ObjectLibrary& library, Rng& rng,
                          AdrState::BoundaryTag* tag) {
  if (library.size() == 0) throw Fault("adr_sample: empty object library");
  if (tag) *tag = {};
  std::array<double, 4> vals{};
  int pinned = -1;
  bool pinned_hi = false;
  if (rng.bernoulli(adr.boundary_prob)) {
    pinned = static_cast<int>(rng.uniform_int(adr.params.size()));
    pinned_hi = rng.bernoulli(0.5);
  }
  for (size_t i = 0; i < adr.params.size(); ++i) {
    const Range& r = adr.params[i].current;
    if (static_cast<int>(i) == pinned) {
      vals[i] = pinned_hi ? r.hi : r.lo;
    } else {
      vals[i] = rng.uniform(r.lo, r.hi);
    }
  }
  if (tag && pinned >= 0) {
    tag->param = pinned;
    tag->high = pinned_hi;
  }
  sim::EnvParams p;
  p.scale_mult = vals[0];
  p.density_mult = vals[1];
  p.friction = vals[2];
  p.force_scale = vals[3];
  p.disturb_prob = spec.disturb_prob;
  p.instance_id = static_cast<int>(rng.uniform_int(library.size()));
  p.category_id = library.cat(p.instance_id);
  return p;
}

void adr_update(AdrState& adr, AdrState::BoundaryTag tag, bool success) {
  if (tag.param < 0) return;  // non-boundary episode: no credit
  AdrState::Param& p = adr.params[tag.param];
  std::vector<int>& buf = tag.high ? p.hi_buffer : p.lo_buffer;
  buf.push_back(success ? 1 : 0);
  if (static_cast<int>(buf.size()) < adr.buffer_size) return;
  double sr = 0.0;
  for (int s : buf) sr += s;
  sr /= buf.size();
  buf.clear();
  const double step = adr.step_frac * (p.full.hi - p.full.lo);
  if (sr >= adr.sr_hi) {
    // Confident at this boundary: push it outward.
    if (tag.high) p.current.hi += step; else p.current.lo -= step;
  } else if (sr <= adr.sr_lo) {
    // Struggling: contract toward the midpoint.
    if (tag.high) p.current.hi -= step; else p.current.lo += step;
  }
  p.current.lo = std::clamp(p.current.lo, p.outer.lo, p.full.mid());
  p.current.hi = std::clamp(p.current.hi, p.full.mid(), p.outer.hi);
  if (p.current.lo > p.current.hi) p.current.lo = p.current.hi = p.full.mid();
}

}  // namespace planarm::rnd
