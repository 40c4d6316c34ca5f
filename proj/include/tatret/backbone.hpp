#pragma once

#include <string>
#include <vector>

#include "tatret/layers.hpp"

namespace tatret {

/// Parse a backbone description of the form "conv:w1,w2,...,wk" (stage
/// widths, each a stride-2 conv). Throws std::invalid_argument on anything
/// else.
std::vector<int> parse_backbone_spec(const std::string& spec);

/// Strided conv encoder -> global average pool -> linear projection to K ->
/// row L2 normalization. Output rows are unit-norm embeddings.
class Backbone {
 public:
  Backbone(int in_ch, const std::string& spec, int embed_dim, const std::string& name);

  void init(Rng& rng);
  Tensor forward(const Tensor& x, bool train);  // (N, K, 1, 1)
  Tensor backward(const Tensor& dy);
  void collect(std::vector<Param*>& out);

 private:
  int in_ch_;
  std::vector<Conv2d> convs_;
  std::vector<ReLU> relus_;
  GlobalAvgPool pool_;
  Linear proj_;
  L2NormalizeRows norm_;
};

}  // namespace tatret
