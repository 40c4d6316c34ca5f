#pragma once

#include <string>
#include <vector>

#include "tatret/rng.hpp"
#include "tatret/tensor.hpp"

namespace tatret {

/// 3x3-style convolution; forward caches its input so backward can rebuild
/// the patch matrix instead of storing it.
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, std::string name);

  void init(Rng& rng);  // He-scaled normal weights, zero bias
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);  // accumulates into weight/bias grads

  void collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int out_side(int in_side) const { return (in_side + 2 * pad_ - ksize_) / stride_ + 1; }
  Param& weight() { return weight_; }

 private:
  int in_ch_, out_ch_, ksize_, stride_, pad_;
  Param weight_;  // out_ch x (in_ch*k*k), row-major
  Param bias_;    // out_ch
  Tensor cached_x_;
};

class Linear {
 public:
  Linear(int in_dim, int out_dim, std::string name);
  void init(Rng& rng);
  Tensor forward(const Tensor& x, bool train);  // x viewed as N x in_dim
  Tensor backward(const Tensor& dy);
  void collect(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  int in_dim_, out_dim_;
  Param weight_;  // out x in
  Param bias_;
  Tensor cached_x_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

 private:
  std::vector<uint8_t> mask_;
};

class Sigmoid {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

 private:
  Tensor cached_y_;
};

/// Nearest-neighbour 2x upsampling.
class Upsample2x {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

 private:
  int in_h_ = 0, in_w_ = 0;
};

class GlobalAvgPool {
 public:
  Tensor forward(const Tensor& x, bool train);  // -> (N, C, 1, 1)
  Tensor backward(const Tensor& dy);

 private:
  int in_h_ = 0, in_w_ = 0;
};

/// Row-wise x / max(||x||, eps); backward projects out the radial component.
class L2NormalizeRows {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

 private:
  Tensor cached_y_;
  std::vector<float> cached_norm_;
};

}  // namespace tatret
