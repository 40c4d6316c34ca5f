#include "tatret/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tatret/common.hpp"

namespace tatret {

namespace {

double clamp_p(double p) { return std::clamp(p, kLossEps, 1.0 - kLossEps); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
}

void check_arcface_inputs(const Tensor& emb, const std::vector<int>& labels,
                          const Tensor& weights) {
  if (emb.per_sample() != weights.per_sample()) {
    throw std::invalid_argument("arcface: embedding dim " +
                                std::to_string(emb.per_sample()) + " vs weight dim " +
                                std::to_string(weights.per_sample()));
  }
  if (static_cast<int>(labels.size()) != emb.n) {
    throw std::invalid_argument("arcface: label count mismatch");
  }
  for (const int y : labels) {
    if (y < 0 || y >= weights.n) {
      throw std::invalid_argument("arcface: label out of range: " + std::to_string(y));
    }
  }
}

struct ArcFaceForward {
  std::vector<double> probs;    // N*C softmax
  std::vector<double> cos;      // N*C clamped cosines
  std::vector<uint8_t> bound;   // clamp hit
  double loss = 0.0;
};

ArcFaceForward arcface_eval(const Tensor& emb, const std::vector<int>& labels,
                            const Tensor& weights, double m, double s) {
  check_arcface_inputs(emb, labels, weights);
  const int n = emb.n, c = weights.n;
  const size_t k = emb.per_sample();
  const double cos_m = std::cos(m), sin_m = std::sin(m);

  ArcFaceForward f;
  f.probs.resize(static_cast<size_t>(n) * c);
  f.cos.resize(static_cast<size_t>(n) * c);
  f.bound.assign(static_cast<size_t>(n) * c, 0);

  std::vector<double> logits(c);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const float* x = emb.sample(i);
    for (int j = 0; j < c; ++j) {
      const float* w = weights.sample(j);
      double dot = 0.0;
      for (size_t d = 0; d < k; ++d) dot += static_cast<double>(x[d]) * w[d];
      const double clamped = std::clamp(dot, -1.0 + kLossEps, 1.0 - kLossEps);
      f.cos[i * c + j] = clamped;
      f.bound[i * c + j] = clamped != dot;
      logits[j] = s * clamped;
    }
    const int y = labels[i];
    const double ct = f.cos[i * c + y];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    logits[y] = s * (ct * cos_m - st * sin_m);

    const double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (int j = 0; j < c; ++j) denom += std::exp(logits[j] - mx);
    const double log_denom = std::log(denom);
    for (int j = 0; j < c; ++j) {
      f.probs[i * c + j] = std::exp(logits[j] - mx) / denom;
    }
    total += -(logits[y] - mx - log_denom);
  }
  f.loss = total / n;
  return f;
}

}  // namespace

double bce(const Tensor& target, const Tensor& pred) {
  require_same_shape(target, pred, "bce");
  if (target.size() == 0) {
    throw std::invalid_argument("bce: empty tensors");
  }
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double t = target.v[i];
    const double p = clamp_p(pred.v[i]);
    acc += -(t * std::log(p) + (1.0 - t) * std::log1p(-p));
  }
  return acc / static_cast<double>(pred.size());
}

Tensor bce_backward(const Tensor& target, const Tensor& pred, double gscale) {
  require_same_shape(target, pred, "bce_backward");
  Tensor dp(pred.n, pred.c, pred.h, pred.w);
  const double inv = gscale / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.v[i];
    if (p < kLossEps || p > 1.0 - kLossEps) continue;  // clamp region
    const double t = target.v[i];
    dp.v[i] = static_cast<float>(inv * (-t / p + (1.0 - t) / (1.0 - p)));
  }
  return dp;
}

double bce_broadcast(const Tensor& target, const Tensor& pred) {
  if (target.n != pred.n || target.c != 1 || target.h != pred.h || target.w != pred.w) {
    throw std::invalid_argument("bce_broadcast: incompatible shapes " + target.shape_str() +
                                " vs " + pred.shape_str());
  }
  double acc = 0.0;
  const size_t plane = static_cast<size_t>(pred.h) * pred.w;
  for (int i = 0; i < pred.n; ++i) {
    const float* tp = target.sample(i);
    for (int ch = 0; ch < pred.c; ++ch) {
      const float* pp = pred.sample(i) + ch * plane;
      for (size_t e = 0; e < plane; ++e) {
        const double t = tp[e];
        const double p = clamp_p(pp[e]);
        acc += -(t * std::log(p) + (1.0 - t) * std::log1p(-p));
      }
    }
  }
  return acc / static_cast<double>(pred.size());
}

Tensor bce_broadcast_backward(const Tensor& target, const Tensor& pred, double gscale) {
  if (target.n != pred.n || target.c != 1 || target.h != pred.h || target.w != pred.w) {
    throw std::invalid_argument("bce_broadcast_backward: incompatible shapes");
  }
  Tensor dp(pred.n, pred.c, pred.h, pred.w);
  const double inv = gscale / static_cast<double>(pred.size());
  const size_t plane = static_cast<size_t>(pred.h) * pred.w;
  for (int i = 0; i < pred.n; ++i) {
    const float* tp = target.sample(i);
    for (int ch = 0; ch < pred.c; ++ch) {
      const float* pp = pred.sample(i) + ch * plane;
      float* dpp = dp.sample(i) + ch * plane;
      for (size_t e = 0; e < plane; ++e) {
        const double p = pp[e];
        if (p < kLossEps || p > 1.0 - kLossEps) continue;
        const double t = tp[e];
        dpp[e] = static_cast<float>(inv * (-t / p + (1.0 - t) / (1.0 - p)));
      }
    }
  }
  return dp;
}

double rec_loss(const Tensor& t, const Tensor& r_t, const Tensor& i, const Tensor& r_i) {
  return bce(t, r_t) + bce(i, r_i);
}

double arcface_loss(const Tensor& emb, const std::vector<int>& labels,
                    const Tensor& weights, double m, double s) {
  return arcface_eval(emb, labels, weights, m, s).loss;
}

std::pair<Tensor, Tensor> arcface_backward(const Tensor& emb, const std::vector<int>& labels,
                                           const Tensor& weights, double m, double s,
                                           double gscale) {
  const ArcFaceForward f = arcface_eval(emb, labels, weights, m, s);
  const int n = emb.n, c = weights.n;
  const size_t k = emb.per_sample();
  const double cos_m = std::cos(m), sin_m = std::sin(m);

  Tensor demb(emb.n, emb.c, emb.h, emb.w);
  Tensor dw(weights.n, weights.c, weights.h, weights.w);
  const double scale = gscale / n;

  for (int i = 0; i < n; ++i) {
    const int y = labels[i];
    const float* x = emb.sample(i);
    float* dx = demb.sample(i);
    for (int j = 0; j < c; ++j) {
      const double p = f.probs[i * c + j];
      double dlogit = scale * (p - (j == y ? 1.0 : 0.0));
      double dcos = s * dlogit;
      if (j == y) {
        const double ct = f.cos[i * c + y];
        const double st = std::sqrt(std::max(kLossEps, 1.0 - ct * ct));
        dcos *= cos_m + sin_m * ct / st;
      }
      if (f.bound[i * c + j]) dcos = 0.0;
      if (dcos == 0.0) continue;
      const float* w = weights.sample(j);
      float* dwj = dw.sample(j);
      const float g = static_cast<float>(dcos);
      for (size_t d = 0; d < k; ++d) {
        dx[d] += g * w[d];
        dwj[d] += g * x[d];
      }
    }
  }
  return {std::move(demb), std::move(dw)};
}

double total_loss(double l_i_arc, double l_t_arc, double l_rec, double lambda) {
  if (!std::isfinite(l_i_arc) || !std::isfinite(l_t_arc) || !std::isfinite(l_rec)) {
    throw InvalidStateError("total_loss: non-finite component");
  }
  return (l_i_arc + l_t_arc + lambda * l_rec) / 3.0;
}

}  // namespace tatret
