#include "tatret/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tatret/losses.hpp"

namespace tatret {

void ModelConfig::validate() const {
  if (K < 1) throw std::invalid_argument("config: K must be >= 1");
  if (m < 0.0 || m >= 3.14159265358979323846) {
    throw std::invalid_argument("config: m must be in [0, pi)");
  }
  if (s <= 0.0) throw std::invalid_argument("config: s must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (C < 2) throw std::invalid_argument("config: C must be >= 2");
  if (input_side < 16 || input_side % 4 != 0) {
    throw std::invalid_argument("config: input_side must be >= 16 and a multiple of 4");
  }
  if (translator_width < 1) throw std::invalid_argument("config: translator_width must be >= 1");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
  if (decay <= 0.0) throw std::invalid_argument("config: decay must be > 0");
  parse_backbone_spec(backbone_spec);  // throws on a malformed spec
}

ArcFaceHead::ArcFaceHead(int num_classes, int embed_dim, const std::string& name)
    : c_(num_classes), k_(embed_dim) {
  weight_.name = name + ".weight";
  weight_.resize(static_cast<size_t>(c_) * k_);
}

void ArcFaceHead::init(Rng& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(k_));
  for (float& w : weight_.value) w = static_cast<float>(rng.normal() * stddev);
}

const Tensor& ArcFaceHead::normalized() {
  normalized_ = Tensor(c_, k_, 1, 1);
  norms_.resize(c_);
  for (int j = 0; j < c_; ++j) {
    const float* w = weight_.value.data() + static_cast<size_t>(j) * k_;
    double acc = 0.0;
    for (int d = 0; d < k_; ++d) acc += static_cast<double>(w[d]) * w[d];
    const float norm = std::max(static_cast<float>(std::sqrt(acc)), 1e-12f);
    norms_[j] = norm;
    float* out = normalized_.sample(j);
    for (int d = 0; d < k_; ++d) out[d] = w[d] / norm;
  }
  return normalized_;
}

void ArcFaceHead::backward_into_raw(const Tensor& dnormalized) {
  for (int j = 0; j < c_; ++j) {
    const float* wn = normalized_.sample(j);
    const float* g = dnormalized.sample(j);
    double dot = 0.0;
    for (int d = 0; d < k_; ++d) dot += static_cast<double>(wn[d]) * g[d];
    float* dw = weight_.grad.data() + static_cast<size_t>(j) * k_;
    for (int d = 0; d < k_; ++d) {
      dw[d] += (g[d] - wn[d] * static_cast<float>(dot)) / norms_[j];
    }
  }
}

Model::Model(const ModelConfig& config)
    : config_((config.validate(), config)),
      to_template_(3, 1, config.translator_width, "to_template"),
      to_image_(1, 3, config.translator_width, "to_image"),
      raw_branch_(3, config.backbone_spec, config.K, "raw_branch"),
      template_branch_(1, config.backbone_spec, config.K, "template_branch"),
      raw_head_(config.C, config.K, "raw_head"),
      template_head_(config.C, config.K, "template_head") {
  Rng rng(mix64(config.init_seed, 0x7a7uLL));
  to_template_.init(rng);
  to_image_.init(rng);
  raw_branch_.init(rng);
  template_branch_.init(rng);
  raw_head_.init(rng);
  template_head_.init(rng);
}

void Model::check_images(const Tensor& images) const {
  require_shape(images, 3, config_.input_side, config_.input_side, "model input");
}

void Model::check_batch(const Batch& batch) const {
  check_images(batch.images);
  require_shape(batch.templates, 1, config_.input_side, config_.input_side,
                "template target");
  if (batch.templates.n != batch.images.n ||
      static_cast<int>(batch.labels.size()) != batch.images.n) {
    throw std::invalid_argument("batch: images/templates/labels size mismatch");
  }
  for (const int y : batch.labels) {
    if (y < 0 || y >= config_.C) {
      throw std::invalid_argument("batch: label out of range: " + std::to_string(y));
    }
  }
}

std::pair<Tensor, Tensor> Model::itt_forward(const Tensor& images) {
  check_images(images);
  Tensor r_t = to_template_.forward(images, false);
  Tensor r_i = to_image_.forward(r_t, false);
  return {std::move(r_t), std::move(r_i)};
}

Tensor Model::embed_raw(const Tensor& images) {
  check_images(images);
  return raw_branch_.forward(images, false);
}

Tensor Model::embed_template(const Tensor& templates) {
  require_shape(templates, 1, config_.input_side, config_.input_side, "embed_template");
  return template_branch_.forward(templates, false);
}

Tensor Model::extract_feature(const Tensor& images) {
  check_images(images);
  const Tensor r_t = to_template_.forward(images, false);
  const Tensor e_raw = raw_branch_.forward(images, false);
  const Tensor e_tpl = template_branch_.forward(r_t, false);
  Tensor feat(images.n, 2 * config_.K, 1, 1);
  for (int i = 0; i < images.n; ++i) {
    std::copy(e_raw.sample(i), e_raw.sample(i) + config_.K, feat.sample(i));
    std::copy(e_tpl.sample(i), e_tpl.sample(i) + config_.K, feat.sample(i) + config_.K);
  }
  return feat;
}

LossParts Model::run(const Batch& batch, bool train) {
  check_batch(batch);
  const Tensor r_t = to_template_.forward(batch.images, train);
  const Tensor r_i = to_image_.forward(r_t, train);
  const Tensor x_i = raw_branch_.forward(batch.images, train);
  const Tensor x_t = template_branch_.forward(r_t, train);
  const Tensor& w_i = raw_head_.normalized();
  const Tensor& w_t = template_head_.normalized();

  LossParts parts;
  parts.l_i_arc = arcface_loss(x_i, batch.labels, w_i, config_.m, config_.s);
  parts.l_t_arc = arcface_loss(x_t, batch.labels, w_t, config_.m, config_.s);
  const double bce_t = bce(batch.templates, r_t);
  const double bce_i = config_.printed_cycle_target ? bce_broadcast(batch.templates, r_i)
                                                    : bce(batch.images, r_i);
  parts.l_rec = bce_t + bce_i;
  parts.total = total_loss(parts.l_i_arc, parts.l_t_arc, parts.l_rec, config_.lambda);

  if (!train) return parts;

  const double third = 1.0 / 3.0;
  const double rec_scale = config_.lambda / 3.0;

  auto [dx_i, dw_i] = arcface_backward(x_i, batch.labels, w_i, config_.m, config_.s, third);
  raw_head_.backward_into_raw(dw_i);
  raw_branch_.backward(dx_i);  // gradient w.r.t. the input image is discarded

  auto [dx_t, dw_t] = arcface_backward(x_t, batch.labels, w_t, config_.m, config_.s, third);
  template_head_.backward_into_raw(dw_t);
  Tensor dr_t = template_branch_.backward(dx_t);

  const Tensor dr_t_rec = bce_backward(batch.templates, r_t, rec_scale);
  const Tensor dr_i = config_.printed_cycle_target
                          ? bce_broadcast_backward(batch.templates, r_i, rec_scale)
                          : bce_backward(batch.images, r_i, rec_scale);
  const Tensor dr_t_cycle = to_image_.backward(dr_i);
  for (size_t i = 0; i < dr_t.size(); ++i) {
    dr_t.v[i] += dr_t_rec.v[i] + dr_t_cycle.v[i];
  }
  to_template_.backward(dr_t);
  return parts;
}

LossParts Model::forward_losses(const Batch& batch) { return run(batch, false); }

LossParts Model::train_step(const Batch& batch, Adam& opt) {
  const std::vector<Param*> ps = params();
  for (Param* p : ps) p->zero_grad();
  const LossParts parts = run(batch, true);
  opt.step(ps);
  return parts;
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  to_template_.collect(out);
  to_image_.collect(out);
  raw_branch_.collect(out);
  template_branch_.collect(out);
  raw_head_.collect(out);
  template_head_.collect(out);
  return out;
}

}  // namespace tatret
