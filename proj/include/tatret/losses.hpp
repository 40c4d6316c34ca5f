#pragma once

#include <utility>
#include <vector>

#include "tatret/tensor.hpp"

namespace tatret {

/// Clamp bound for probabilities before logs and for cosines before the
/// margin identity.
inline constexpr double kLossEps = 1e-7;

/// Mean binary cross-entropy over every element; pred is clamped to
/// [kLossEps, 1-kLossEps] first. Shapes must match exactly.
double bce(const Tensor& target, const Tensor& pred);

/// d(bce)/d(pred) scaled by upstream gscale; zero where the clamp binds.
Tensor bce_backward(const Tensor& target, const Tensor& pred, double gscale);

/// BCE with a single-channel target broadcast across pred's channels.
double bce_broadcast(const Tensor& target, const Tensor& pred);
Tensor bce_broadcast_backward(const Tensor& target, const Tensor& pred, double gscale);

/// bce(T, R_T) + bce(I, R_I).
double rec_loss(const Tensor& t, const Tensor& r_t, const Tensor& i, const Tensor& r_i);

/// Additive-angular-margin softmax loss. `emb` rows and `weights` rows must
/// be unit-norm; cosines are clamped to [-1+eps, 1-eps], and the margin is
/// applied as cos(theta+m) = cos*cos(m) - sqrt(1-cos^2)*sin(m).
/// Throws std::invalid_argument on label out of range or dim mismatch.
double arcface_loss(const Tensor& emb, const std::vector<int>& labels,
                    const Tensor& weights, double m, double s);

/// Gradients w.r.t. (emb, weights), both at unit-norm inputs, scaled by gscale.
std::pair<Tensor, Tensor> arcface_backward(const Tensor& emb, const std::vector<int>& labels,
                                           const Tensor& weights, double m, double s,
                                           double gscale);

/// (l_i_arc + l_t_arc + lambda * l_rec) / 3.
/// Throws InvalidStateError when any input is non-finite.
double total_loss(double l_i_arc, double l_t_arc, double l_rec, double lambda);

}  // namespace tatret
