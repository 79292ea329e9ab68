#pragma once

#include <string>
#include <vector>

#include "planarm/geom.hpp"
#include "planarm/rng.hpp"
#include "planarm/sim/types.hpp"

namespace planarm::tasks {

// One procedural object: canonical-scale CCW polygon with the centroid at
// the origin (levers: pivot at the origin, `handle` marks the grip point).
struct Instance {
  int id = 0;
  int category = 0;
  std::vector<Vec2> verts;
  double mass = 0.1;                // kg at scale 1, density multiplier 1
  Vec2 bbox_half;
  Vec2 handle;                      // levers only
  std::vector<double> gen_params;   // generator knobs, used for split checks
};

enum class Split { train, held_out };

struct ObjectLibrary {
  Split split = Split::train;
  std::vector<std::string> category_names;
  std::vector<Instance> instances;

  int cat(int instance_id) const;
  int num_categories() const { return static_cast<int>(category_names.size()); }
  int size() const { return static_cast<int>(instances.size()); }
  const Instance& at(int instance_id) const;

  void save(const std::string& path) const;
  static ObjectLibrary load(const std::string& path);
};

// Pick-and-place libraries: six generator families (box, tee, ell, disk,
// cup, bar). Held-out instances draw every generator parameter outside the
// train ranges, so the parameter sets are disjoint.
ObjectLibrary make_pick_library(Split split, int per_category, uint64_t seed);

// Peg library: one category of slender cuboid pegs.
ObjectLibrary make_peg_library(int count, uint64_t seed);

// Faucet library: straight and bent levers with a paddle, pivot at origin.
ObjectLibrary make_faucet_library(int count, uint64_t seed);

// Reach placeholder (single marker instance).
ObjectLibrary make_reach_library();

struct ComplexityScore {
  double shape_complexity = 0.0;   // entropy of the turning-angle histogram
  double grasp_difficulty = 0.0;   // 1 - P75 of antipodal grasp quality
};

// Faults on degenerate polygons (< 3 vertices).
ComplexityScore score_complexity(const Instance& instance);

}  // namespace planarm::tasks
