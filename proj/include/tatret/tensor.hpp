#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tatret {

/// Dense NCHW float tensor. Vectors/matrices use h = w = 1.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {}

  size_t size() const { return v.size(); }
  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  size_t per_sample() const { return static_cast<size_t>(c) * h * w; }
  float* sample(int i) { return v.data() + per_sample() * i; }
  const float* sample(int i) const { return v.data() + per_sample() * i; }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

inline void require_shape(const Tensor& t, int c, int h, int w, const char* op) {
  if (t.n <= 0 || t.c != c || t.h != h || t.w != w) {
    throw std::invalid_argument(std::string(op) + ": expected (N," + std::to_string(c) +
                                "," + std::to_string(h) + "," + std::to_string(w) +
                                "), got " + t.shape_str());
  }
}

/// Learnable array plus its gradient accumulator.
struct Param {
  std::string name;
  std::vector<float> value;
  std::vector<float> grad;

  void resize(size_t size) {
    value.assign(size, 0.0f);
    grad.assign(size, 0.0f);
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }
};

}  // namespace tatret
