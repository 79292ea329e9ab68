#include "planarm/tasks/library.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace planarm::tasks {

namespace {

constexpr double kSurfaceDensity = 80.0;  // kg/m^2 at scale 1

Vec2 bbox_half_of(const std::vector<Vec2>& verts) {
  double mx = 0.0, my = 0.0;
  for (const Vec2& v : verts) {
    mx = std::max(mx, std::abs(v.x));
    my = std::max(my, std::abs(v.y));
  }
  return {mx, my};
}

void center_and_finish(Instance& inst) {
  Polygon poly{inst.verts};
  if (poly.area() < 0.0) std::reverse(inst.verts.begin(), inst.verts.end());
  poly.verts = inst.verts;
  const Vec2 c = poly.centroid();
  for (Vec2& v : inst.verts) v = v - c;
  inst.handle = inst.handle - c;
  poly.verts = inst.verts;
  inst.mass = std::abs(poly.area()) * kSurfaceDensity;
  inst.bbox_half = bbox_half_of(inst.verts);
  if (!poly.is_simple()) throw Fault("library: generated polygon not simple");
  if (!poly.contains({0.0, 0.0}))
    throw Fault("library: polygon does not contain its centroid");
}

struct ParamRange {
  double lo, hi;
};

// Train draws inside [lo, hi]; held-out draws from a shell strictly outside.
double draw_param(Rng& rng, ParamRange r, Split split) {
  if (split == Split::train) return rng.uniform(r.lo, r.hi);
  const double w = 0.18 * (r.hi - r.lo);
  return rng.bernoulli(0.5) ? rng.uniform(r.lo - w, r.lo - 0.02 * w)
                            : rng.uniform(r.hi + 0.02 * w, r.hi + w);
}

std::vector<Vec2> rect(double w, double h) {
  return {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
}

Instance gen_box(Rng& rng, Split split) {
  Instance inst;
  const double w = draw_param(rng, {0.032, 0.052}, split);
  const double h = draw_param(rng, {0.026, 0.046}, split);
  inst.verts = rect(w, h);
  inst.gen_params = {w, h};
  return inst;
}

Instance gen_bar(Rng& rng, Split split) {
  Instance inst;
  const double len = draw_param(rng, {0.090, 0.125}, split);
  const double w = draw_param(rng, {0.016, 0.024}, split);
  inst.verts = rect(len, w);
  inst.gen_params = {len, w};
  return inst;
}

Instance gen_tee(Rng& rng, Split split) {
  Instance inst;
  const double head = draw_param(rng, {0.070, 0.100}, split);
  const double t = draw_param(rng, {0.016, 0.022}, split);
  const double stem = draw_param(rng, {0.030, 0.050}, split);
  // Head on top, stem hanging below.
  inst.verts = {{-head / 2, 0},      {-t / 2, 0},      {-t / 2, -stem},
                {t / 2, -stem},      {t / 2, 0},       {head / 2, 0},
                {head / 2, t},       {-head / 2, t}};
  inst.gen_params = {head, t, stem};
  return inst;
}

Instance gen_ell(Rng& rng, Split split) {
  Instance inst;
  // Legs capped near 2.6x the thickness so the centroid stays inside the
  // material.
  const double la = draw_param(rng, {0.048, 0.060}, split);
  const double lb = draw_param(rng, {0.046, 0.058}, split);
  const double t = draw_param(rng, {0.023, 0.027}, split);
  inst.verts = {{0, 0}, {la, 0}, {la, t}, {t, t}, {t, lb}, {0, lb}};
  inst.gen_params = {la, lb, t};
  return inst;
}

Instance gen_disk(Rng& rng, Split split) {
  Instance inst;
  const double r = draw_param(rng, {0.016, 0.027}, split);
  const int n = 16;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    inst.verts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  inst.gen_params = {r};
  return inst;
}

Instance gen_cup(Rng& rng, Split split) {
  Instance inst;
  const double wb = draw_param(rng, {0.024, 0.036}, split);
  const double ratio = draw_param(rng, {1.40, 1.80}, split);
  const double h = draw_param(rng, {0.035, 0.055}, split);
  const double wt = wb * ratio;
  inst.verts = {{-wb / 2, -h / 2}, {wb / 2, -h / 2}, {wt / 2, h / 2},
                {-wt / 2, h / 2}};
  inst.gen_params = {wb, ratio, h};
  return inst;
}

using Generator = Instance (*)(Rng&, Split);

}  // namespace

int ObjectLibrary::cat(int instance_id) const { return at(instance_id).category; }

const Instance& ObjectLibrary::at(int instance_id) const {
  if (instance_id < 0 || instance_id >= size())
    throw Fault("ObjectLibrary: unknown instance id " + std::to_string(instance_id));
  return instances[instance_id];
}

ObjectLibrary make_pick_library(Split split, int per_category, uint64_t seed) {
  const std::vector<std::pair<std::string, Generator>> gens = {
      {"box", gen_box}, {"tee", gen_tee},   {"ell", gen_ell},
      {"disk", gen_disk}, {"cup", gen_cup}, {"bar", gen_bar}};
  ObjectLibrary lib;
  lib.split = split;
  Rng rng(Rng::derive(seed, split == Split::train ? 101 : 202));
  for (const auto& [name, gen] : gens) lib.category_names.push_back(name);
  for (size_t c = 0; c < gens.size(); ++c) {
    for (int k = 0; k < per_category; ++k) {
      // Degenerate draws (centroid outside the material) are resampled.
      for (int attempt = 0;; ++attempt) {
        try {
          Instance inst = gens[c].second(rng, split);
          inst.id = lib.size();
          inst.category = static_cast<int>(c);
          center_and_finish(inst);
          lib.instances.push_back(std::move(inst));
          break;
        } catch (const Fault&) {
          if (attempt > 200) throw;
        }
      }
    }
  }
  return lib;
}

ObjectLibrary make_peg_library(int count, uint64_t seed) {
  ObjectLibrary lib;
  lib.split = Split::train;
  lib.category_names = {"peg"};
  Rng rng(Rng::derive(seed, 303));
  for (int k = 0; k < count; ++k) {
    Instance inst;
    const double len = rng.uniform(0.080, 0.110);
    const double w = rng.uniform(0.016, 0.022);
    inst.verts = rect(len, w);
    inst.gen_params = {len, w};
    inst.id = k;
    inst.category = 0;
    center_and_finish(inst);
    lib.instances.push_back(std::move(inst));
  }
  return lib;
}

ObjectLibrary make_faucet_library(int count, uint64_t seed) {
  ObjectLibrary lib;
  lib.split = Split::train;
  lib.category_names = {"lever", "bent_lever"};
  Rng rng(Rng::derive(seed, 404));
  for (int k = 0; k < count; ++k) {
    Instance inst;
    const int cat = k % 2;
    const double len = rng.uniform(0.080, 0.140);
    const double shaft = rng.uniform(0.014, 0.020);
    const double paddle_w = rng.uniform(0.030, 0.055);
    const double paddle_l = rng.uniform(0.022, 0.034);
    const double bend = cat == 1 ? rng.uniform(0.25, 0.60) : 0.0;
    // Shaft from the pivot plus a wider paddle at the end, bent upward for
    // the second family. Pivot stays at the origin (not the centroid).
    const double body = len - paddle_l;
    std::vector<Vec2> shaft_poly = {{0, -shaft / 2},
                                    {body, -shaft / 2},
                                    {body, shaft / 2},
                                    {0, shaft / 2}};
    std::vector<Vec2> paddle = {{body, -paddle_w / 2},
                                {body + paddle_l, -paddle_w / 2},
                                {body + paddle_l, paddle_w / 2},
                                {body, paddle_w / 2}};
    if (bend != 0.0) {
      for (Vec2& v : paddle) {
        v = Vec2{body, 0.0} + (v - Vec2{body, 0.0}).rotated(bend);
      }
    }
    // Merge into a single simple polygon: shaft bottom edge, paddle loop,
    // shaft top edge.
    inst.verts = {shaft_poly[0], shaft_poly[1]};
    for (const Vec2& v : paddle) inst.verts.push_back(v);
    inst.verts.push_back(shaft_poly[2]);
    inst.verts.push_back(shaft_poly[3]);
    Polygon p{inst.verts};
    if (p.area() < 0.0) std::reverse(inst.verts.begin(), inst.verts.end());
    if (!p.is_simple()) throw Fault("faucet generator: polygon not simple");
    inst.handle = Vec2{body, 0.0} + Vec2{paddle_l / 2, 0.0}.rotated(bend);
    inst.gen_params = {len, shaft, paddle_w, paddle_l, bend};
    inst.mass = std::abs(Polygon{inst.verts}.area()) * kSurfaceDensity;
    inst.bbox_half = bbox_half_of(inst.verts);
    inst.id = k;
    inst.category = cat;
    lib.instances.push_back(std::move(inst));
  }
  return lib;
}

ObjectLibrary make_reach_library() {
  ObjectLibrary lib;
  lib.split = Split::train;
  lib.category_names = {"marker"};
  Instance inst;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * M_PI * i / 8;
    inst.verts.push_back({0.01 * std::cos(a), 0.01 * std::sin(a)});
  }
  inst.gen_params = {0.01};
  center_and_finish(inst);
  lib.instances.push_back(std::move(inst));
  return lib;
}

ComplexityScore score_complexity(const Instance& instance) {
  const std::vector<Vec2>& vs = instance.verts;
  if (vs.size() < 3) throw Fault("score_complexity: degenerate polygon");
  ComplexityScore score;

  // Turning angles at each vertex, binned over (-pi, pi].
  constexpr int kBins = 16;
  std::array<double, kBins> hist{};
  const size_t n = vs.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vs[i] - vs[(i + n - 1) % n];
    const Vec2 e1 = vs[(i + 1) % n] - vs[i];
    const double turn = std::atan2(e0.cross(e1), e0.dot(e1));
    int bin = static_cast<int>(std::floor((turn + M_PI) / (2.0 * M_PI) * kBins));
    bin = std::clamp(bin, 0, kBins - 1);
    hist[bin] += 1.0;
  }
  double entropy = 0.0;
  for (double h : hist) {
    if (h > 0.0) {
      const double p = h / static_cast<double>(n);
      entropy -= p * std::log(p);
    }
  }
  score.shape_complexity = entropy;

  // Antipodal parallel-jaw quality over sampled closing directions: both
  // support contacts must lie within the friction cone of the jaw axis and
  // the object must fit the gripper.
  constexpr int kSamples = 256;
  constexpr double kMu = 0.5;
  constexpr double kMaxAperture = 0.08;
  const double cone_cos = std::cos(std::atan(kMu));
  Rng rng(Rng::derive(2718281828ULL, static_cast<uint64_t>(instance.id)));
  std::vector<double> quality(kSamples, 0.0);
  for (int s = 0; s < kSamples; ++s) {
    const double ang = rng.uniform(0.0, M_PI);
    const Vec2 axis{std::cos(ang), std::sin(ang)};
    double lo = 1e9, hi = -1e9;
    size_t ilo = 0, ihi = 0;
    for (size_t i = 0; i < n; ++i) {
      const double d = vs[i].dot(axis);
      if (d < lo) { lo = d; ilo = i; }
      if (d > hi) { hi = d; ihi = i; }
    }
    if (hi - lo > kMaxAperture) continue;  // does not fit the jaws
    auto contact_alignment = [&](size_t vi, double sign) {
      // Best alignment between the jaw axis and the outward normals of the
      // two edges meeting at the support vertex.
      double best = 0.0;
      for (int which = 0; which < 2; ++which) {
        const size_t a = which == 0 ? (vi + n - 1) % n : vi;
        const size_t b = (a + 1) % n;
        const Vec2 nrm = (vs[a] - vs[b]).perp().normalized();  // outward, CCW
        best = std::max(best, nrm.dot(axis * sign));
      }
      return best;
    };
    const double align_lo = contact_alignment(ilo, -1.0);
    const double align_hi = contact_alignment(ihi, 1.0);
    const double q = std::min(align_lo, align_hi);
    quality[s] = q >= cone_cos ? q : 0.0;
  }
  std::sort(quality.begin(), quality.end());
  const double p75 = quality[static_cast<size_t>(0.75 * (kSamples - 1))];
  score.grasp_difficulty = 1.0 - p75;
  return score;
}

void ObjectLibrary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Fault("ObjectLibrary: cannot write " + path);
  out.precision(17);
  out << "planarm-objlib v1\n";
  out << "split " << (split == Split::train ? "train" : "held_out") << "\n";
  out << "categories";
  for (const auto& c : category_names) out << " " << c;
  out << "\n";
  for (const Instance& inst : instances) {
    out << "instance " << inst.id << " " << inst.category << " mass "
        << inst.mass << " handle " << inst.handle.x << " " << inst.handle.y
        << " params " << inst.gen_params.size();
    for (double p : inst.gen_params) out << " " << p;
    out << " verts " << inst.verts.size();
    for (const Vec2& v : inst.verts) out << " " << v.x << " " << v.y;
    out << "\n";
  }
}

ObjectLibrary ObjectLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Fault("ObjectLibrary: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "planarm-objlib v1")
    throw Fault("ObjectLibrary: bad header in " + path);
  ObjectLibrary lib;
  std::string word;
  while (in >> word) {
    if (word == "split") {
      in >> word;
      lib.split = word == "train" ? Split::train : Split::held_out;
    } else if (word == "categories") {
      std::getline(in, line);
      std::istringstream ss(line);
      while (ss >> word) lib.category_names.push_back(word);
    } else if (word == "instance") {
      Instance inst;
      size_t np = 0, nv = 0;
      in >> inst.id >> inst.category >> word >> inst.mass >> word >>
          inst.handle.x >> inst.handle.y >> word >> np;
      inst.gen_params.resize(np);
      for (double& p : inst.gen_params) in >> p;
      in >> word >> nv;
      inst.verts.resize(nv);
      for (Vec2& v : inst.verts) in >> v.x >> v.y;
      inst.bbox_half = bbox_half_of(inst.verts);
      lib.instances.push_back(std::move(inst));
    } else {
      throw Fault("ObjectLibrary: unexpected token '" + word + "'");
    }
  }
  return lib;
}

}  // namespace planarm::tasks
