#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "tatret/rng.hpp"

namespace tatret {

/// Dense float image, HWC interleaved, values nominally in [0, 1].
/// Channels is 1 (ink / mask / template) or 3 (RGB).
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<size_t>(height) * width * channels, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  float& at(int r, int c, int ch = 0) {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }
  float at(int r, int c, int ch = 0) const {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& raw() { return data_; }
  const std::vector<float>& raw() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct Box {
  int row0 = 0;
  int col0 = 0;
  int height = 0;
  int width = 0;
};

/// Bilinear resample (half-pixel centers).
Image resize_bilinear(const Image& src, int out_height, int out_width);

/// Separable Gaussian blur, kernel truncated at radius ceil(3*sigma),
/// replicated borders. sigma <= 0 returns a copy.
Image gaussian_blur(const Image& src, double sigma);

/// Copy a sub-rectangle; throws std::invalid_argument when out of bounds.
Image crop(const Image& src, const Box& box);

void clamp01(Image& img);

/// Tight bounding box of pixels strictly above `threshold` in channel 0.
/// Empty optional when no pixel qualifies.
std::optional<Box> nonzero_bbox(const Image& mask, float threshold = 0.5f);

Image to_grayscale(const Image& rgb);
Image replicate_channels(const Image& single, int channels);

/// Maximum jitter strengths; factors are drawn uniformly around identity.
/// hue is a fraction of the full color wheel.
struct ColorJitter {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;
};

/// Photometric augmentation for RGB training inputs. Applies brightness,
/// contrast, saturation, hue in that fixed order; output clamped to [0, 1].
Image apply_color_jitter(const Image& rgb, const ColorJitter& jitter, Rng& rng);

// 8-bit PNG I/O. Gray and RGB supported; alpha is stripped on read.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace tatret
