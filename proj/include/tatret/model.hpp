#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tatret/backbone.hpp"
#include "tatret/optim.hpp"
#include "tatret/translator.hpp"

namespace tatret {

struct ModelConfig {
  int K = 512;                // embedding size per branch
  double m = 0.5;             // angular margin
  double s = 64.0;            // logit scale
  double lambda = 4.0;        // reconstruction weight
  int C = 0;                  // number of categories
  int input_side = 224;
  std::string backbone_spec = "conv:16,32,64,128";
  int translator_width = 8;
  int epochs = 100;
  int batch_size = 64;
  double lr = 1e-5;
  double decay = 0.95;
  // Interpret `decay` as literal optimizer weight decay instead of a
  // per-epoch multiplicative learning-rate factor.
  bool decay_as_weight_decay = false;
  // Score the image reconstruction against the template instead of the
  // input image (the printed form of the cycle loss).
  bool printed_cycle_target = false;
  uint64_t init_seed = 1;

  void validate() const;  // throws std::invalid_argument
};

struct Batch {
  Tensor images;     // (N, 3, S, S)
  Tensor templates;  // (N, 1, S, S)
  std::vector<int> labels;
};

struct LossParts {
  double l_i_arc = 0.0;
  double l_t_arc = 0.0;
  double l_rec = 0.0;
  double total = 0.0;
};

/// Margin-softmax classification head: raw C x K weights, row-normalized on
/// every forward; gradients at the normalized rows are projected back onto
/// the raw parameters.
class ArcFaceHead {
 public:
  ArcFaceHead(int num_classes, int embed_dim, const std::string& name);
  void init(Rng& rng);
  const Tensor& normalized();  // recomputes the unit-row view
  void backward_into_raw(const Tensor& dnormalized);
  void collect(std::vector<Param*>& out) { out.push_back(&weight_); }

 private:
  int c_, k_;
  Param weight_;
  Tensor normalized_;
  std::vector<float> norms_;
};

/// Cyclic image<->template translation with dual embedding branches:
///  - translator A: image -> template estimate (R_T)
///  - translator B: R_T -> image reconstruction (R_I)
///  - backbone over the raw image and backbone over R_T, each L2-normalized
///    to K dims and trained by its own margin-softmax head.
/// The retrieval feature is the 2K concatenation of the two embeddings.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // Inference (no caching, batch-independent).
  std::pair<Tensor, Tensor> itt_forward(const Tensor& images);
  Tensor embed_raw(const Tensor& images);
  Tensor embed_template(const Tensor& templates);
  Tensor extract_feature(const Tensor& images);  // (N, 2K, 1, 1)

  LossParts forward_losses(const Batch& batch);         // eval mode
  LossParts train_step(const Batch& batch, Adam& opt);  // fwd + bwd + update

  std::vector<Param*> params();

 private:
  void check_images(const Tensor& images) const;
  void check_batch(const Batch& batch) const;
  LossParts run(const Batch& batch, bool train);

  ModelConfig config_;
  Translator to_template_;
  Translator to_image_;
  Backbone raw_branch_;
  Backbone template_branch_;
  ArcFaceHead raw_head_;
  ArcFaceHead template_head_;
};

}  // namespace tatret
