#pragma once

#include <string>
#include <vector>

#include "tatret/layers.hpp"

namespace tatret {

/// Encoder-decoder with additive skip connections and a sigmoid head.
/// Input side must be a multiple of 4 (two stride-2 stages).
class Translator {
 public:
  Translator(int in_ch, int out_ch, int width, const std::string& name);

  void init(Rng& rng);
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);
  void collect(std::vector<Param*>& out);

 private:
  int in_ch_;
  Conv2d enc1_, enc2_, enc3_, mid_, dec2_, dec1_, head_;
  ReLU re1_, re2_, re3_, rm_, rd2_, rd1_;
  Upsample2x up2_, up1_;
  Sigmoid out_act_;
};

}  // namespace tatret
