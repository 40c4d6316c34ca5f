#include "tatret/compose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tatret/common.hpp"

namespace tatret {

namespace {

int scaled_side_for(double scale, int base_height, int base_width) {
  const int shorter = std::min(base_height, base_width);
  const int side = static_cast<int>(std::lround(scale * shorter));
  return std::clamp(side, 1, shorter);
}

}  // namespace

AugmentationParams sample_params(Rng& rng, const AugmentationRanges& ranges,
                                 int base_height, int base_width) {
  AugmentationParams p;
  p.scale = rng.uniform(ranges.scale_min, ranges.scale_max);
  const int side = scaled_side_for(p.scale, base_height, base_width);
  p.offset_row = rng.uniform_int(0, base_height - side);
  p.offset_col = rng.uniform_int(0, base_width - side);
  for (double& c : p.color_shift) c = rng.uniform(ranges.color_min, ranges.color_max);
  p.blur_sigma = rng.uniform(ranges.blur_min, ranges.blur_max);
  p.opacity = rng.uniform(ranges.opacity_min, ranges.opacity_max);
  return p;
}

SyntheticSample compose(const TattooTemplate& tpl, const SkinBase& base,
                        const AugmentationParams& params,
                        const std::array<double, 3>& ink_color) {
  const int bh = base.image.height(), bw = base.image.width();
  const int side = scaled_side_for(params.scale, bh, bw);
  if (params.offset_row < 0 || params.offset_col < 0 ||
      params.offset_row + side > bh || params.offset_col + side > bw) {
    throw std::invalid_argument("compose: placement out of bounds");
  }

  const Image scaled = resize_bilinear(tpl.ink, side, side);

  SyntheticSample out;
  out.template_id = tpl.id;
  out.category_label = tpl.category_label;
  out.params = params;

  out.mask = Image(bh, bw, 1);
  Image canvas(bh, bw, 1);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const float ink = scaled.at(r, c);
      canvas.at(params.offset_row + r, params.offset_col + c) = ink;
      if (ink > kMaskInkThreshold) {
        out.mask.at(params.offset_row + r, params.offset_col + c) = 1.0f;
      }
    }
  }
  const Image blurred = gaussian_blur(canvas, params.blur_sigma);

  out.image = Image(bh, bw, 3);
  for (int r = 0; r < bh; ++r) {
    for (int c = 0; c < bw; ++c) {
      const float ink = blurred.at(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        const float t = ink * static_cast<float>(params.color_shift[ch]);
        const float a = static_cast<float>(params.opacity) * t;
        out.image.at(r, c, ch) = base.image.at(r, c, ch) * (1.0f - a) +
                                 static_cast<float>(ink_color[ch]) * a;
      }
    }
  }
  clamp01(out.image);
  return out;
}

Image render_template_target(const TattooTemplate& tpl, const AugmentationParams& params,
                             int base_height, int base_width) {
  const int side = scaled_side_for(params.scale, base_height, base_width);
  if (params.offset_row < 0 || params.offset_col < 0 ||
      params.offset_row + side > base_height || params.offset_col + side > base_width) {
    throw std::invalid_argument("render_template_target: placement out of bounds");
  }
  const Image scaled = resize_bilinear(tpl.ink, side, side);
  Image target(base_height, base_width, 1, 1.0f);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      target.at(params.offset_row + r, params.offset_col + c) = 1.0f - scaled.at(r, c);
    }
  }
  clamp01(target);
  return target;
}

Box mask_bbox_with_margin(const Image& mask, double margin_frac) {
  const auto bbox = nonzero_bbox(mask);
  if (!bbox) {
    throw InvalidStateError("mask_bbox_with_margin: empty mask");
  }
  const int mr = static_cast<int>(std::lround(margin_frac * bbox->height));
  const int mc = static_cast<int>(std::lround(margin_frac * bbox->width));
  const int r0 = std::max(0, bbox->row0 - mr);
  const int c0 = std::max(0, bbox->col0 - mc);
  const int r1 = std::min(mask.height(), bbox->row0 + bbox->height + mr);
  const int c1 = std::min(mask.width(), bbox->col0 + bbox->width + mc);
  return Box{r0, c0, r1 - r0, c1 - c0};
}

SyntheticSample crop_to_tattoo(const SyntheticSample& sample, double margin_frac,
                               int out_side) {
  if (out_side < 8) {
    throw std::invalid_argument("crop_to_tattoo: output side must be >= 8");
  }
  const Box box = mask_bbox_with_margin(sample.mask, margin_frac);
  SyntheticSample out = sample;
  out.image = resize_bilinear(crop(sample.image, box), out_side, out_side);
  return out;
}

}  // namespace tatret
