#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tatret/image.hpp"
#include "tatret/skin.hpp"
#include "tatret/template_gen.hpp"

namespace tatret {

/// Ink pixels above this scaled-density threshold (before blur) belong to
/// the tattoo mask.
inline constexpr float kMaskInkThreshold = 0.02f;

/// One concrete draw of the augmentation knobs for a single sample.
struct AugmentationParams {
  double scale = 1.0;                               // of base's shorter side
  int offset_row = 0;                               // template top-left in base coords
  int offset_col = 0;
  std::array<double, 3> color_shift{1.0, 1.0, 1.0}; // per-channel ink attenuation
  double blur_sigma = 0.0;
  double opacity = 1.0;
  uint64_t seed = 0;
};

struct AugmentationRanges {
  double scale_min = 0.5;
  double scale_max = 1.0;
  double color_min = 0.6;
  double color_max = 1.0;
  double blur_min = 0.0;
  double blur_max = 2.0;
  double opacity_min = 0.35;
  double opacity_max = 0.95;
};

/// Draw params uniformly within `ranges`; the placement offset always keeps
/// the scaled template inside a base of the given size.
AugmentationParams sample_params(Rng& rng, const AugmentationRanges& ranges,
                                 int base_height, int base_width);

/// Composite plus its aligned mask, before and after cropping.
struct SyntheticSample {
  Image image;  // RGB in [0,1]
  std::string template_id;
  int category_label = 0;
  Image mask;   // binary, aligned with the pre-crop composite
  AugmentationParams params;
};

/// Blend the template onto the base:
///   out_c = base_c * (1 - opacity * t'_c) + ink_color_c * opacity * t'_c
/// with t'_c = blur(scaled ink) * color_shift_c placed at the offset. The
/// mask marks scaled ink > kMaskInkThreshold before blurring.
/// Throws std::invalid_argument when the placement exits the base.
SyntheticSample compose(const TattooTemplate& tpl, const SkinBase& base,
                        const AugmentationParams& params,
                        const std::array<double, 3>& ink_color = {0.0, 0.0, 0.0});

/// The reconstruction target paired with a composite: the same scaled ink at
/// full opacity, unshifted and unblurred, on a white field (pixel = 1 - ink).
Image render_template_target(const TattooTemplate& tpl, const AugmentationParams& params,
                             int base_height, int base_width);

/// Tight mask bbox grown by margin_frac of its own extent per side, clamped.
Box mask_bbox_with_margin(const Image& mask, double margin_frac);

/// Crop the composite to the mask bbox (with margin) and resize to
/// out_side². The mask keeps its pre-crop alignment.
/// Throws InvalidStateError when the mask is empty.
SyntheticSample crop_to_tattoo(const SyntheticSample& sample, double margin_frac,
                               int out_side);

}  // namespace tatret
