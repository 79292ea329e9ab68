#include "planarm/io/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace planarm::io {

uint64_t fnv1a64(const void* data, size_t n, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Key bindings: one entry per config key, with read/write accessors.
struct Binding {
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

struct Schema {
  std::vector<Binding> entries;

  void bind(const std::string& key, double* f) {
    entries.push_back({key, [f] { return fmt_double(*f); },
                       [f, key](const std::string& s) {
                         try {
                           *f = std::stod(s);
                         } catch (...) {
                           throw Fault("config: bad number for " + key);
                         }
                       }});
  }
  void bind(const std::string& key, int* f) {
    entries.push_back({key, [f] { return std::to_string(*f); },
                       [f, key](const std::string& s) {
                         try {
                           *f = std::stoi(s);
                         } catch (...) {
                           throw Fault("config: bad integer for " + key);
                         }
                       }});
  }
  void bind(const std::string& key, uint64_t* f) {
    entries.push_back({key, [f] { return std::to_string(*f); },
                       [f, key](const std::string& s) {
                         try {
                           *f = std::stoull(s);
                         } catch (...) {
                           throw Fault("config: bad integer for " + key);
                         }
                       }});
  }
  void bind(const std::string& key, std::string* f) {
    entries.push_back({key, [f] { return *f; },
                       [f](const std::string& s) { *f = s; }});
  }
};

Schema make_schema(RunConfig& c) {
  Schema s;
  s.bind("run.task", &c.task);
  s.bind("run.seed", &c.seed);
  s.bind("run.out_dir", &c.out_dir);

  s.bind("arm.kp", &c.arm.kp);
  s.bind("arm.kd", &c.arm.kd);
  s.bind("arm.control_hz", &c.arm.control_hz);
  s.bind("arm.sim_hz", &c.arm.sim_hz);
  s.bind("arm.gripper_max_aperture", &c.arm.gripper_max_aperture);
  s.bind("arm.joint_inertia", &c.arm.joint_inertia);
  s.bind("arm.contact_tol", &c.arm.contact_tol);
  s.bind("arm.grip_stiffness", &c.arm.grip_stiffness);
  s.bind("arm.action_joint_scale", &c.arm.action_joint_scale);
  s.bind("arm.action_grip_scale", &c.arm.action_grip_scale);

  s.bind("depth.rays", &c.depth.rays);
  s.bind("depth.fov", &c.depth.fov);
  s.bind("depth.max_range", &c.depth.max_range);

  s.bind("rand.scale_lo", &c.rand.scale.lo);
  s.bind("rand.scale_hi", &c.rand.scale.hi);
  s.bind("rand.density_lo", &c.rand.density.lo);
  s.bind("rand.density_hi", &c.rand.density.hi);
  s.bind("rand.friction_lo", &c.rand.friction.lo);
  s.bind("rand.friction_hi", &c.rand.friction.hi);
  s.bind("rand.force_lo", &c.rand.force_scale.lo);
  s.bind("rand.force_hi", &c.rand.force_scale.hi);
  s.bind("rand.obj_pos_noise", &c.rand.obj_pos_noise);
  s.bind("rand.obj_rot_noise_deg", &c.rand.obj_rot_noise_deg);
  s.bind("rand.joint_pos_noise", &c.rand.joint_pos_noise);
  s.bind("rand.disturb_prob", &c.rand.disturb_prob);
  s.bind("curriculum.ramp_updates", &c.ramp_updates);

  s.bind("ppo.num_envs", &c.ppo.num_envs);
  s.bind("ppo.horizon", &c.ppo.horizon);
  s.bind("ppo.gamma", &c.ppo.gamma);
  s.bind("ppo.lam", &c.ppo.lam);
  s.bind("ppo.clip", &c.ppo.clip);
  s.bind("ppo.vf_coef", &c.ppo.vf_coef);
  s.bind("ppo.ent_coef", &c.ppo.ent_coef);
  s.bind("ppo.epochs", &c.ppo.epochs);
  s.bind("ppo.minibatch", &c.ppo.minibatch);
  s.bind("ppo.lr", &c.ppo.lr);
  s.bind("ppo.max_grad_norm", &c.ppo.max_grad_norm);
  s.bind("ppo.kl_abort", &c.ppo.kl_abort);
  s.bind("ppo.reward_scale", &c.ppo.reward_scale);
  s.bind("ppo.updates", &c.ppo.updates);
  s.bind("ppo.grad_chunks", &c.ppo.grad_chunks);
  s.bind("ppo.threads", &c.ppo.threads);

  s.bind("net.policy_hidden", &c.net.policy_hidden);
  s.bind("net.encoder_hidden", &c.net.encoder_hidden);
  s.bind("net.z_dim", &c.net.z_dim);
  s.bind("net.depth_feature", &c.net.depth_feature);
  s.bind("net.history_feature", &c.net.history_feature);
  s.bind("net.history_len", &c.net.history_len);

  s.bind("adapter.lr", &c.adapter.lr);
  s.bind("adapter.updates", &c.adapter.updates);
  s.bind("adapter.minibatch", &c.adapter.minibatch);
  s.bind("adapter.epochs", &c.adapter.epochs);
  s.bind("adapter.explore_std", &c.adapter.explore_std);
  s.bind("adapter.val_every", &c.adapter.val_every);
  s.bind("adapter.val_episodes", &c.adapter.val_episodes);

  s.bind("adr.buffer_size", &c.adr.buffer_size);
  s.bind("adr.sr_hi", &c.adr.sr_hi);
  s.bind("adr.sr_lo", &c.adr.sr_lo);
  s.bind("adr.step_frac", &c.adr.step_frac);
  s.bind("adr.boundary_prob", &c.adr.boundary_prob);
  s.bind("adr.init_frac", &c.adr.init_frac);

  s.bind("library.per_category", &c.library.per_category);
  s.bind("library.held_out_total", &c.library.held_out_total);
  s.bind("library.peg_count", &c.library.peg_count);
  s.bind("library.faucet_count", &c.library.faucet_count);
  s.bind("library.seed", &c.library.library_seed);

  s.bind("eval.episodes", &c.eval.episodes);
  s.bind("eval.max_steps", &c.eval.max_steps);
  s.bind("eval.heatmap_episodes", &c.eval.heatmap_episodes);
  return s;
}

}  // namespace

std::string RunConfig::canonical() const {
  Schema s = make_schema(*const_cast<RunConfig*>(this));
  std::vector<std::pair<std::string, std::string>> kv;
  for (const Binding& b : s.entries) kv.emplace_back(b.key, b.get());
  std::sort(kv.begin(), kv.end());
  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
  return out.str();
}

std::string RunConfig::digest() const {
  const std::string c = canonical();
  return to_hex(fnv1a64(c.data(), c.size()));
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Fault("config: cannot write " + path);
  std::string section;
  Schema s = make_schema(*const_cast<RunConfig*>(this));
  std::vector<std::pair<std::string, std::string>> kv;
  for (const Binding& b : s.entries) kv.emplace_back(b.key, b.get());
  std::sort(kv.begin(), kv.end());
  for (const auto& [k, v] : kv) {
    const std::string sec = k.substr(0, k.find('.'));
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    out << k.substr(k.find('.') + 1) << " = " << v << "\n";
  }
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  Schema schema = make_schema(cfg);
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Fault("config: malformed section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Fault("config: expected key = value at line " + std::to_string(lineno));
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    kv[key] = trim(line.substr(eq + 1));
  }
  std::vector<std::string> unknown;
  for (const auto& [k, v] : kv) {
    bool found = false;
    for (Binding& b : schema.entries) {
      if (b.key == k) {
        b.set(v);
        found = true;
        break;
      }
    }
    if (!found) unknown.push_back(k);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Fault(msg);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Fault("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

}  // namespace planarm::io
