#include "tatret/layers.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace tatret {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

// Patch matrix: (in_ch*k*k) x (oh*ow), one column per output position.
void im2col(const float* x, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* cols) {
  for (int ch = 0; ch < c; ++ch) {
    for (int kr = 0; kr < k; ++kr) {
      for (int kc = 0; kc < k; ++kc) {
        float* row = cols + (static_cast<size_t>(ch) * k * k + kr * k + kc) *
                                (static_cast<size_t>(oh) * ow);
        for (int orow = 0; orow < oh; ++orow) {
          const int ir = orow * stride - pad + kr;
          for (int ocol = 0; ocol < ow; ++ocol) {
            const int ic = ocol * stride - pad + kc;
            const bool in = ir >= 0 && ir < h && ic >= 0 && ic < w;
            row[orow * ow + ocol] =
                in ? x[(static_cast<size_t>(ch) * h + ir) * w + ic] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im_accumulate(const float* cols, int c, int h, int w, int k, int stride,
                       int pad, int oh, int ow, float* dx) {
  for (int ch = 0; ch < c; ++ch) {
    for (int kr = 0; kr < k; ++kr) {
      for (int kc = 0; kc < k; ++kc) {
        const float* row = cols + (static_cast<size_t>(ch) * k * k + kr * k + kc) *
                                      (static_cast<size_t>(oh) * ow);
        for (int orow = 0; orow < oh; ++orow) {
          const int ir = orow * stride - pad + kr;
          if (ir < 0 || ir >= h) continue;
          for (int ocol = 0; ocol < ow; ++ocol) {
            const int ic = ocol * stride - pad + kc;
            if (ic < 0 || ic >= w) continue;
            dx[(static_cast<size_t>(ch) * h + ir) * w + ic] += row[orow * ow + ocol];
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, std::string name)
    : in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride), pad_(pad) {
  weight_.name = name + ".weight";
  weight_.resize(static_cast<size_t>(out_ch) * in_ch * ksize * ksize);
  bias_.name = name + ".bias";
  bias_.resize(out_ch);
}

void Conv2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch_) * ksize_ * ksize_));
  for (float& w : weight_.value) w = static_cast<float>(rng.normal() * stddev);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  if (x.c != in_ch_) {
    throw std::invalid_argument(weight_.name + ": channel mismatch, got " + x.shape_str());
  }
  const int oh = out_side(x.h), ow = out_side(x.w);
  Tensor y(x.n, out_ch_, oh, ow);
  const size_t patch = static_cast<size_t>(in_ch_) * ksize_ * ksize_;
  std::vector<float> cols(patch * oh * ow);
  MapCM wmat(weight_.value.data(), out_ch_, static_cast<Eigen::Index>(patch));
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_ch_, x.h, x.w, ksize_, stride_, pad_, oh, ow, cols.data());
    MapCM cmat(cols.data(), static_cast<Eigen::Index>(patch),
               static_cast<Eigen::Index>(oh) * ow);
    MapM ymat(y.sample(i), out_ch_, static_cast<Eigen::Index>(oh) * ow);
    ymat.noalias() = wmat * cmat;
    for (int oc = 0; oc < out_ch_; ++oc) ymat.row(oc).array() += bias_.value[oc];
  }
  if (train) cached_x_ = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  const int oh = dy.h, ow = dy.w;
  const size_t patch = static_cast<size_t>(in_ch_) * ksize_ * ksize_;
  Tensor dx(x.n, x.c, x.h, x.w);
  std::vector<float> cols(patch * oh * ow);
  std::vector<float> dcols(patch * oh * ow);
  MapCM wmat(weight_.value.data(), out_ch_, static_cast<Eigen::Index>(patch));
  MapM dwmat(weight_.grad.data(), out_ch_, static_cast<Eigen::Index>(patch));
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_ch_, x.h, x.w, ksize_, stride_, pad_, oh, ow, cols.data());
    MapCM cmat(cols.data(), static_cast<Eigen::Index>(patch),
               static_cast<Eigen::Index>(oh) * ow);
    MapCM dymat(dy.sample(i), out_ch_, static_cast<Eigen::Index>(oh) * ow);
    dwmat.noalias() += dymat * cmat.transpose();
    for (int oc = 0; oc < out_ch_; ++oc) bias_.grad[oc] += dymat.row(oc).sum();
    MapM dcmat(dcols.data(), static_cast<Eigen::Index>(patch),
               static_cast<Eigen::Index>(oh) * ow);
    dcmat.noalias() = wmat.transpose() * dymat;
    col2im_accumulate(dcols.data(), in_ch_, x.h, x.w, ksize_, stride_, pad_, oh, ow,
                      dx.sample(i));
  }
  return dx;
}

Linear::Linear(int in_dim, int out_dim, std::string name) : in_dim_(in_dim), out_dim_(out_dim) {
  weight_.name = name + ".weight";
  weight_.resize(static_cast<size_t>(out_dim) * in_dim);
  bias_.name = name + ".bias";
  bias_.resize(out_dim);
}

void Linear::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / in_dim_);
  for (float& w : weight_.value) w = static_cast<float>(rng.normal() * stddev);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor Linear::forward(const Tensor& x, bool train) {
  if (static_cast<int>(x.per_sample()) != in_dim_) {
    throw std::invalid_argument(weight_.name + ": dim mismatch, got " + x.shape_str());
  }
  Tensor y(x.n, out_dim_, 1, 1);
  MapCM xmat(x.data(), x.n, in_dim_);
  MapCM wmat(weight_.value.data(), out_dim_, in_dim_);
  MapM ymat(y.data(), x.n, out_dim_);
  ymat.noalias() = xmat * wmat.transpose();
  for (int j = 0; j < out_dim_; ++j) ymat.col(j).array() += bias_.value[j];
  if (train) cached_x_ = x;
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  MapCM xmat(x.data(), x.n, in_dim_);
  MapCM dymat(dy.data(), dy.n, out_dim_);
  MapM dwmat(weight_.grad.data(), out_dim_, in_dim_);
  dwmat.noalias() += dymat.transpose() * xmat;
  for (int j = 0; j < out_dim_; ++j) bias_.grad[j] += dymat.col(j).sum();
  Tensor dx(x.n, x.c, x.h, x.w);
  MapM dxmat(dx.data(), x.n, in_dim_);
  MapCM wmat(weight_.value.data(), out_dim_, in_dim_);
  dxmat.noalias() = dymat * wmat;
  return dx;
}

Tensor ReLU::forward(const Tensor& x, bool train) {
  Tensor y = x;
  if (train) mask_.assign(x.size(), 0);
  for (size_t i = 0; i < y.size(); ++i) {
    if (y.v[i] > 0.0f) {
      if (train) mask_[i] = 1;
    } else {
      y.v[i] = 0.0f;
    }
  }
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    if (!mask_[i]) dx.v[i] = 0.0f;
  }
  return dx;
}

Tensor Sigmoid::forward(const Tensor& x, bool train) {
  Tensor y = x;
  for (float& v : y.v) v = 1.0f / (1.0f + std::exp(-v));
  if (train) cached_y_ = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    const float y = cached_y_.v[i];
    dx.v[i] *= y * (1.0f - y);
  }
  return dx;
}

Tensor Upsample2x::forward(const Tensor& x, bool train) {
  if (train) {
    in_h_ = x.h;
    in_w_ = x.w;
  }
  Tensor y(x.n, x.c, x.h * 2, x.w * 2);
  for (int i = 0; i < x.n; ++i) {
    for (int ch = 0; ch < x.c; ++ch) {
      const float* src = x.sample(i) + static_cast<size_t>(ch) * x.h * x.w;
      float* dst = y.sample(i) + static_cast<size_t>(ch) * y.h * y.w;
      for (int r = 0; r < y.h; ++r) {
        for (int c = 0; c < y.w; ++c) {
          dst[r * y.w + c] = src[(r / 2) * x.w + (c / 2)];
        }
      }
    }
  }
  return y;
}

Tensor Upsample2x::backward(const Tensor& dy) {
  Tensor dx(dy.n, dy.c, in_h_, in_w_);
  for (int i = 0; i < dy.n; ++i) {
    for (int ch = 0; ch < dy.c; ++ch) {
      const float* src = dy.sample(i) + static_cast<size_t>(ch) * dy.h * dy.w;
      float* dst = dx.sample(i) + static_cast<size_t>(ch) * in_h_ * in_w_;
      for (int r = 0; r < dy.h; ++r) {
        for (int c = 0; c < dy.w; ++c) {
          dst[(r / 2) * in_w_ + (c / 2)] += src[r * dy.w + c];
        }
      }
    }
  }
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, bool train) {
  if (train) {
    in_h_ = x.h;
    in_w_ = x.w;
  }
  Tensor y(x.n, x.c, 1, 1);
  const float inv = 1.0f / (static_cast<float>(x.h) * x.w);
  for (int i = 0; i < x.n; ++i) {
    for (int ch = 0; ch < x.c; ++ch) {
      const float* src = x.sample(i) + static_cast<size_t>(ch) * x.h * x.w;
      float acc = 0.0f;
      for (int p = 0; p < x.h * x.w; ++p) acc += src[p];
      y.sample(i)[ch] = acc * inv;
    }
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
  Tensor dx(dy.n, dy.c, in_h_, in_w_);
  const float inv = 1.0f / (static_cast<float>(in_h_) * in_w_);
  for (int i = 0; i < dy.n; ++i) {
    for (int ch = 0; ch < dy.c; ++ch) {
      const float g = dy.sample(i)[ch] * inv;
      float* dst = dx.sample(i) + static_cast<size_t>(ch) * in_h_ * in_w_;
      for (int p = 0; p < in_h_ * in_w_; ++p) dst[p] = g;
    }
  }
  return dx;
}

Tensor L2NormalizeRows::forward(const Tensor& x, bool train) {
  Tensor y = x;
  const size_t dim = x.per_sample();
  std::vector<float> norms(x.n);
  for (int i = 0; i < x.n; ++i) {
    double acc = 0.0;
    const float* row = x.sample(i);
    for (size_t j = 0; j < dim; ++j) acc += static_cast<double>(row[j]) * row[j];
    const float norm = std::max(static_cast<float>(std::sqrt(acc)), 1e-12f);
    norms[i] = norm;
    float* out = y.sample(i);
    for (size_t j = 0; j < dim; ++j) out[j] = row[j] / norm;
  }
  if (train) {
    cached_y_ = y;
    cached_norm_ = std::move(norms);
  }
  return y;
}

Tensor L2NormalizeRows::backward(const Tensor& dy) {
  Tensor dx = dy;
  const size_t dim = dy.per_sample();
  for (int i = 0; i < dy.n; ++i) {
    const float* y = cached_y_.sample(i);
    const float* g = dy.sample(i);
    double dot = 0.0;
    for (size_t j = 0; j < dim; ++j) dot += static_cast<double>(y[j]) * g[j];
    float* out = dx.sample(i);
    for (size_t j = 0; j < dim; ++j) {
      out[j] = (g[j] - y[j] * static_cast<float>(dot)) / cached_norm_[i];
    }
  }
  return dx;
}

}  // namespace tatret
