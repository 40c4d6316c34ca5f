#include "tatret/translator.hpp"

#include <stdexcept>

namespace tatret {

Translator::Translator(int in_ch, int out_ch, int width, const std::string& name)
    : in_ch_(in_ch),
      enc1_(in_ch, width, 3, 1, 1, name + ".enc1"),
      enc2_(width, 2 * width, 3, 2, 1, name + ".enc2"),
      enc3_(2 * width, 4 * width, 3, 2, 1, name + ".enc3"),
      mid_(4 * width, 4 * width, 3, 1, 1, name + ".mid"),
      dec2_(4 * width, 2 * width, 3, 1, 1, name + ".dec2"),
      dec1_(2 * width, width, 3, 1, 1, name + ".dec1"),
      head_(width, out_ch, 3, 1, 1, name + ".head") {
  if (width < 1) {
    throw std::invalid_argument("Translator: width must be >= 1");
  }
}

void Translator::init(Rng& rng) {
  enc1_.init(rng);
  enc2_.init(rng);
  enc3_.init(rng);
  mid_.init(rng);
  dec2_.init(rng);
  dec1_.init(rng);
  head_.init(rng);
}

Tensor Translator::forward(const Tensor& x, bool train) {
  if (x.c != in_ch_) {
    throw std::invalid_argument("Translator: expected " + std::to_string(in_ch_) +
                                " channels, got " + x.shape_str());
  }
  if (x.h % 4 != 0 || x.w % 4 != 0 || x.h < 8 || x.w < 8) {
    throw std::invalid_argument("Translator: spatial dims must be multiples of 4, got " +
                                x.shape_str());
  }
  const Tensor s1 = re1_.forward(enc1_.forward(x, train), train);
  const Tensor s2 = re2_.forward(enc2_.forward(s1, train), train);
  Tensor t = re3_.forward(enc3_.forward(s2, train), train);
  t = rm_.forward(mid_.forward(t, train), train);

  t = dec2_.forward(up2_.forward(t, train), train);
  for (size_t i = 0; i < t.size(); ++i) t.v[i] += s2.v[i];
  t = rd2_.forward(t, train);

  t = dec1_.forward(up1_.forward(t, train), train);
  for (size_t i = 0; i < t.size(); ++i) t.v[i] += s1.v[i];
  t = rd1_.forward(t, train);

  return out_act_.forward(head_.forward(t, train), train);
}

Tensor Translator::backward(const Tensor& dy) {
  Tensor g = head_.backward(out_act_.backward(dy));

  g = rd1_.backward(g);
  const Tensor dskip1 = g;  // additive skip from enc1
  g = up1_.backward(dec1_.backward(g));

  g = rd2_.backward(g);
  const Tensor dskip2 = g;  // additive skip from enc2
  g = up2_.backward(dec2_.backward(g));

  g = enc3_.backward(re3_.backward(mid_.backward(rm_.backward(g))));
  for (size_t i = 0; i < g.size(); ++i) g.v[i] += dskip2.v[i];

  g = enc2_.backward(re2_.backward(g));
  for (size_t i = 0; i < g.size(); ++i) g.v[i] += dskip1.v[i];

  return enc1_.backward(re1_.backward(g));
}

void Translator::collect(std::vector<Param*>& out) {
  enc1_.collect(out);
  enc2_.collect(out);
  enc3_.collect(out);
  mid_.collect(out);
  dec2_.collect(out);
  dec1_.collect(out);
  head_.collect(out);
}

}  // namespace tatret
