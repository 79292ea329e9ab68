#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "planarm/rng.hpp"

namespace planarm::nn {

enum class Act { linear, tanh_ };

struct LayerSpec {
  enum class Kind { dense, conv1d, flatten } kind;
  // dense
  int units = 0;
  // conv1d
  int channels = 0, kernel = 0, stride = 1;
  Act act = Act::linear;

  static LayerSpec dense(int units, Act act) {
    LayerSpec s;
    s.kind = Kind::dense;
    s.units = units;
    s.act = act;
    return s;
  }
  static LayerSpec conv1d(int channels, int kernel, int stride, Act act) {
    LayerSpec s;
    s.kind = Kind::conv1d;
    s.channels = channels;
    s.kernel = kernel;
    s.stride = stride;
    s.act = act;
    return s;
  }
  static LayerSpec flatten() {
    LayerSpec s;
    s.kind = Kind::flatten;
    return s;
  }
};

// Named parameter array. Shapes: dense W is [out, in]; conv W is
// [out_ch, in_ch, kernel]; biases are [n].
template <typename T>
struct Blob {
  std::string name;
  std::vector<int> shape;
  std::vector<T> val;

  size_t size() const { return val.size(); }
};

struct Shape {
  int channels = 1;  // 1 for flat vectors
  int length = 0;
  int flat() const { return channels * length; }
};

template <typename T>
inline void check_finite(const std::vector<T>& v, const char* what) {
  for (T x : v) {
    if (!std::isfinite(static_cast<double>(x))) {
      throw std::runtime_error(std::string("non-finite value in ") + what);
    }
  }
}

// Per-call activation storage so one network can serve many concurrent
// forward passes (rollout workers share read-only parameters).
template <typename T>
struct Fwd {
  std::vector<std::vector<T>> acts;  // post-activation output of each layer
  const std::vector<T>& out() const { return acts.back(); }
};

// Feed-forward stack of dense / conv1d / flatten layers with reverse-mode
// gradients. Accumulation order is fixed, so results are bit-reproducible.
template <typename T>
class Net {
 public:
  Net() = default;

  Net(std::string name, Shape input, std::vector<LayerSpec> layers)
      : name_(std::move(name)), input_(input), layers_(std::move(layers)) {
    Shape cur = input;
    for (size_t li = 0; li < layers_.size(); ++li) {
      const LayerSpec& l = layers_[li];
      Blob<T> w, b;
      w.name = name_ + ".l" + std::to_string(li) + ".w";
      b.name = name_ + ".l" + std::to_string(li) + ".b";
      switch (l.kind) {
        case LayerSpec::Kind::dense: {
          int in = cur.flat();
          w.shape = {l.units, in};
          b.shape = {l.units};
          cur = Shape{1, l.units};
          break;
        }
        case LayerSpec::Kind::conv1d: {
          int lin = cur.length;
          int lout = (lin - l.kernel) / l.stride + 1;
          if (l.kernel > lin || lout <= 0) {
            throw std::runtime_error("conv1d: kernel exceeds input length in " +
                                     name_);
          }
          w.shape = {l.channels, cur.channels, l.kernel};
          b.shape = {l.channels};
          cur = Shape{l.channels, lout};
          break;
        }
        case LayerSpec::Kind::flatten:
          cur = Shape{1, cur.flat()};
          break;
      }
      w.val.assign(numel(w.shape), T(0));
      b.val.assign(numel(b.shape), T(0));
      weights_.push_back(std::move(w));
      biases_.push_back(std::move(b));
      shapes_.push_back(cur);
    }
  }

  const std::string& name() const { return name_; }
  int input_size() const { return input_.flat(); }
  int output_size() const { return shapes_.empty() ? input_.flat() : shapes_.back().flat(); }

  // Orthogonal rows (or columns when out > in), hidden layers scaled by
  // `hidden_gain`, final layer by `out_gain`; biases zero.
  void init_orthogonal(Rng& rng, double hidden_gain, double out_gain) {
    for (size_t li = 0; li < layers_.size(); ++li) {
      if (layers_[li].kind == LayerSpec::Kind::flatten) continue;
      bool last = true;
      for (size_t lj = li + 1; lj < layers_.size(); ++lj) {
        if (layers_[lj].kind != LayerSpec::Kind::flatten) last = false;
      }
      double gain = last ? out_gain : hidden_gain;
      int rows = weights_[li].shape[0];
      int cols = static_cast<int>(weights_[li].size()) / rows;
      orthogonal(rng, rows, cols, gain, weights_[li].val);
      std::fill(biases_[li].val.begin(), biases_[li].val.end(), T(0));
    }
  }

  void forward(const std::vector<T>& x, Fwd<T>& f) const {
    if (static_cast<int>(x.size()) != input_.flat()) {
      throw std::runtime_error(name_ + ": input size mismatch");
    }
    f.acts.resize(layers_.size());
    const std::vector<T>* cur = &x;
    Shape cs = input_;
    for (size_t li = 0; li < layers_.size(); ++li) {
      const LayerSpec& l = layers_[li];
      std::vector<T>& out = f.acts[li];
      switch (l.kind) {
        case LayerSpec::Kind::dense:
          dense_fwd(weights_[li], biases_[li], *cur, out);
          break;
        case LayerSpec::Kind::conv1d:
          conv_fwd(l, weights_[li], biases_[li], cs, *cur, out);
          break;
        case LayerSpec::Kind::flatten:
          out = *cur;
          break;
      }
      if (l.act == Act::tanh_) {
        for (T& v : out) v = std::tanh(v);
      }
      check_finite(out, name_.c_str());
      cur = &out;
      cs = shapes_[li];
    }
  }

  // dout has output_size() entries; parameter gradients are accumulated into
  // gw/gb (same layout as weights()/biases()); dx, when non-null, receives
  // the input gradient.
  void backward(const std::vector<T>& x, const Fwd<T>& f,
                const std::vector<T>& dout, std::vector<std::vector<T>>& gw,
                std::vector<std::vector<T>>& gb, std::vector<T>* dx) const {
    std::vector<T> dcur = dout;
    std::vector<T> dprev;
    for (size_t li = layers_.size(); li-- > 0;) {
      const LayerSpec& l = layers_[li];
      const std::vector<T>& a = f.acts[li];
      if (l.act == Act::tanh_) {
        for (size_t i = 0; i < dcur.size(); ++i) dcur[i] *= T(1) - a[i] * a[i];
      }
      const std::vector<T>& in = li == 0 ? x : f.acts[li - 1];
      Shape in_shape = li == 0 ? input_ : shapes_[li - 1];
      bool need_dx = li > 0 || dx != nullptr;
      dprev.assign(in.size(), T(0));
      switch (l.kind) {
        case LayerSpec::Kind::dense:
          dense_bwd(weights_[li], in, dcur, gw[li], gb[li],
                    need_dx ? &dprev : nullptr);
          break;
        case LayerSpec::Kind::conv1d:
          conv_bwd(l, weights_[li], in_shape, in, dcur, gw[li], gb[li],
                   need_dx ? &dprev : nullptr);
          break;
        case LayerSpec::Kind::flatten:
          dprev = dcur;
          break;
      }
      dcur.swap(dprev);
    }
    if (dx) *dx = dcur;
  }

  std::vector<Blob<T>*> blobs() {
    std::vector<Blob<T>*> out;
    for (size_t i = 0; i < weights_.size(); ++i) {
      if (layers_[i].kind == LayerSpec::Kind::flatten) continue;
      out.push_back(&weights_[i]);
      out.push_back(&biases_[i]);
    }
    return out;
  }

  // Closed-form parameter count from the spec alone.
  int64_t param_count() const {
    int64_t n = 0;
    for (size_t i = 0; i < weights_.size(); ++i) {
      n += static_cast<int64_t>(weights_[i].size()) + biases_[i].size();
    }
    return n;
  }

  // Gradient buffers matching blobs()' layer layout.
  void make_grads(std::vector<std::vector<T>>& gw,
                  std::vector<std::vector<T>>& gb) const {
    gw.resize(weights_.size());
    gb.resize(biases_.size());
    for (size_t i = 0; i < weights_.size(); ++i) {
      gw[i].assign(weights_[i].size(), T(0));
      gb[i].assign(biases_[i].size(), T(0));
    }
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }

 private:
  static size_t numel(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), size_t(1),
                           std::multiplies<size_t>());
  }

  static void dense_fwd(const Blob<T>& w, const Blob<T>& b,
                        const std::vector<T>& x, std::vector<T>& y) {
    const int out = w.shape[0];
    const int in = w.shape[1];
    y.assign(out, T(0));
    for (int o = 0; o < out; ++o) {
      const T* wr = w.val.data() + static_cast<size_t>(o) * in;
      T acc = b.val[o];
      for (int i = 0; i < in; ++i) acc += wr[i] * x[i];
      y[o] = acc;
    }
  }

  static void dense_bwd(const Blob<T>& w, const std::vector<T>& x,
                        const std::vector<T>& dy, std::vector<T>& gw,
                        std::vector<T>& gb, std::vector<T>* dx) {
    const int out = w.shape[0];
    const int in = w.shape[1];
    for (int o = 0; o < out; ++o) {
      const T d = dy[o];
      gb[o] += d;
      T* gwr = gw.data() + static_cast<size_t>(o) * in;
      const T* wr = w.val.data() + static_cast<size_t>(o) * in;
      if (dx) {
        T* dxp = dx->data();
        for (int i = 0; i < in; ++i) {
          gwr[i] += d * x[i];
          dxp[i] += d * wr[i];
        }
      } else {
        for (int i = 0; i < in; ++i) gwr[i] += d * x[i];
      }
    }
  }

  static void conv_fwd(const LayerSpec& l, const Blob<T>& w, const Blob<T>& b,
                       Shape in_shape, const std::vector<T>& x,
                       std::vector<T>& y) {
    const int cin = in_shape.channels, lin = in_shape.length;
    const int cout = l.channels, k = l.kernel, s = l.stride;
    const int lout = (lin - k) / s + 1;
    y.assign(static_cast<size_t>(cout) * lout, T(0));
    for (int o = 0; o < cout; ++o) {
      for (int j = 0; j < lout; ++j) {
        T acc = b.val[o];
        for (int c = 0; c < cin; ++c) {
          const T* wr = w.val.data() + (static_cast<size_t>(o) * cin + c) * k;
          const T* xr = x.data() + static_cast<size_t>(c) * lin + j * s;
          for (int t = 0; t < k; ++t) acc += wr[t] * xr[t];
        }
        y[static_cast<size_t>(o) * lout + j] = acc;
      }
    }
  }

  static void conv_bwd(const LayerSpec& l, const Blob<T>& w, Shape in_shape,
                       const std::vector<T>& x, const std::vector<T>& dy,
                       std::vector<T>& gw, std::vector<T>& gb,
                       std::vector<T>* dx) {
    const int cin = in_shape.channels, lin = in_shape.length;
    const int cout = l.channels, k = l.kernel, s = l.stride;
    const int lout = (lin - k) / s + 1;
    for (int o = 0; o < cout; ++o) {
      for (int j = 0; j < lout; ++j) {
        const T d = dy[static_cast<size_t>(o) * lout + j];
        gb[o] += d;
        for (int c = 0; c < cin; ++c) {
          T* gwr = gw.data() + (static_cast<size_t>(o) * cin + c) * k;
          const T* xr = x.data() + static_cast<size_t>(c) * lin + j * s;
          for (int t = 0; t < k; ++t) gwr[t] += d * xr[t];
          if (dx) {
            const T* wr = w.val.data() + (static_cast<size_t>(o) * cin + c) * k;
            T* dxr = dx->data() + static_cast<size_t>(c) * lin + j * s;
            for (int t = 0; t < k; ++t) dxr[t] += d * wr[t];
          }
        }
      }
    }
  }

  // Orthogonal init via modified Gram-Schmidt on Gaussian rows, computed in
  // double regardless of T.
  static void orthogonal(Rng& rng, int rows, int cols, double gain,
                         std::vector<T>& out) {
    const bool wide = cols >= rows;
    const int n = wide ? rows : cols;  // number of vectors to orthonormalize
    const int dim = wide ? cols : rows;
    std::vector<std::vector<double>> q(n, std::vector<double>(dim));
    for (auto& row : q) {
      for (double& v : row) v = rng.normal();
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        double d = 0.0;
        for (int t = 0; t < dim; ++t) d += q[i][t] * q[j][t];
        for (int t = 0; t < dim; ++t) q[i][t] -= d * q[j][t];
      }
      double nrm = 0.0;
      for (double v : q[i]) nrm += v * v;
      nrm = std::sqrt(nrm);
      if (nrm < 1e-12) nrm = 1.0;
      for (double& v : q[i]) v = v / nrm * gain;
    }
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        double v = wide ? q[r][c] : q[c][r];
        out[static_cast<size_t>(r) * cols + c] = static_cast<T>(v);
      }
    }
  }

  std::string name_;
  Shape input_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;  // output shape per layer
  std::vector<Blob<T>> weights_;
  std::vector<Blob<T>> biases_;
};

}  // namespace planarm::nn
