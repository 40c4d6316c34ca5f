#include "tatret/backbone.hpp"

#include <charconv>
#include <stdexcept>

namespace tatret {

std::vector<int> parse_backbone_spec(const std::string& spec) {
  const std::string prefix = "conv:";
  if (spec.rfind(prefix, 0) != 0) {
    throw std::invalid_argument("backbone spec must start with 'conv:': " + spec);
  }
  std::vector<int> widths;
  size_t pos = prefix.size();
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    int value = 0;
    const auto [ptr, ec] = std::from_chars(spec.data() + pos, spec.data() + comma, value);
    if (ec != std::errc() || ptr != spec.data() + comma || value < 1) {
      throw std::invalid_argument("bad backbone stage width in: " + spec);
    }
    widths.push_back(value);
    pos = comma + 1;
    if (comma == spec.size()) break;
  }
  if (widths.empty()) {
    throw std::invalid_argument("backbone spec has no stages: " + spec);
  }
  return widths;
}

Backbone::Backbone(int in_ch, const std::string& spec, int embed_dim, const std::string& name)
    : in_ch_(in_ch),
      proj_(parse_backbone_spec(spec).back(), embed_dim, name + ".proj") {
  const std::vector<int> widths = parse_backbone_spec(spec);
  int prev = in_ch;
  for (size_t i = 0; i < widths.size(); ++i) {
    convs_.emplace_back(prev, widths[i], 3, 2, 1, name + ".stage" + std::to_string(i));
    prev = widths[i];
  }
  relus_.resize(convs_.size());
}

void Backbone::init(Rng& rng) {
  for (auto& conv : convs_) conv.init(rng);
  proj_.init(rng);
}

Tensor Backbone::forward(const Tensor& x, bool train) {
  if (x.c != in_ch_) {
    throw std::invalid_argument("Backbone: expected " + std::to_string(in_ch_) +
                                " channels, got " + x.shape_str());
  }
  Tensor t = x;
  for (size_t i = 0; i < convs_.size(); ++i) {
    t = relus_[i].forward(convs_[i].forward(t, train), train);
  }
  t = pool_.forward(t, train);
  t = proj_.forward(t, train);
  return norm_.forward(t, train);
}

Tensor Backbone::backward(const Tensor& dy) {
  Tensor g = norm_.backward(dy);
  g = proj_.backward(g);
  g = pool_.backward(g);
  for (size_t i = convs_.size(); i-- > 0;) {
    g = convs_[i].backward(relus_[i].backward(g));
  }
  return g;
}

void Backbone::collect(std::vector<Param*>& out) {
  for (auto& conv : convs_) conv.collect(out);
  proj_.collect(out);
}

}  // namespace tatret
