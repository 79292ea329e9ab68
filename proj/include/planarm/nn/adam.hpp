#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "planarm/nn/net.hpp"

namespace planarm::nn {

// Standard Adam with bias correction over an ordered list of parameter
// blobs. The order is fixed at construction and shared with checkpoints.
template <typename T>
class Adam {
 public:
  struct Config {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  Adam(std::vector<Blob<T>*> params, Config cfg)
      : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->size(), T(0));
      v_[i].assign(params_[i]->size(), T(0));
    }
  }

  // grads[i] must be parallel to params()[i].
  void step(const std::vector<const std::vector<T>*>& grads) {
    if (grads.size() != params_.size()) {
      throw std::runtime_error("adam: gradient list mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      std::vector<T>& p = params_[i]->val;
      const std::vector<T>& g = *grads[i];
      if (g.size() != p.size()) throw std::runtime_error("adam: shape mismatch");
      T* m = m_[i].data();
      T* v = v_[i].data();
      for (size_t j = 0; j < p.size(); ++j) {
        const double gj = static_cast<double>(g[j]);
        if (!std::isfinite(gj)) throw std::runtime_error("adam: non-finite gradient");
        double mj = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
        double vj = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
        m[j] = static_cast<T>(mj);
        v[j] = static_cast<T>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        p[j] = static_cast<T>(p[j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  int64_t step_count() const { return t_; }
  const Config& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  const std::vector<Blob<T>*>& params() const { return params_; }

  std::vector<std::vector<T>>& moments_m() { return m_; }
  std::vector<std::vector<T>>& moments_v() { return v_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  std::vector<Blob<T>*> params_;
  Config cfg_;
  std::vector<std::vector<T>> m_, v_;
  int64_t t_ = 0;
};

// Gradient buffers parallel to a list of blobs.
template <typename T>
struct GradSet {
  std::vector<std::vector<T>> g;

  explicit GradSet(const std::vector<Blob<T>*>& params) {
    g.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) g[i].assign(params[i]->size(), T(0));
  }
  GradSet() = default;

  void zero() {
    for (auto& gi : g) std::fill(gi.begin(), gi.end(), T(0));
  }

  void add(const GradSet& other) {
    for (size_t i = 0; i < g.size(); ++i) {
      for (size_t j = 0; j < g[i].size(); ++j) g[i][j] += other.g[i][j];
    }
  }

  void scale(T s) {
    for (auto& gi : g) {
      for (T& x : gi) x *= s;
    }
  }

  std::vector<const std::vector<T>*> views() const {
    std::vector<const std::vector<T>*> out;
    out.reserve(g.size());
    for (const auto& gi : g) out.push_back(&gi);
    return out;
  }
};

}  // namespace planarm::nn
