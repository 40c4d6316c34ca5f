#include "tatret/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tatret {

namespace {

void check_nonempty(const Image& img, const char* op) {
  if (img.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty image");
  }
}

}  // namespace

Image resize_bilinear(const Image& src, int out_height, int out_width) {
  check_nonempty(src, "resize_bilinear");
  if (out_height <= 0 || out_width <= 0) {
    throw std::invalid_argument("resize_bilinear: output size must be positive");
  }
  const int h = src.height(), w = src.width(), c = src.channels();
  Image dst(out_height, out_width, c);
  const double sy = static_cast<double>(h) / out_height;
  const double sx = static_cast<double>(w) / out_width;
  for (int r = 0; r < out_height; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int col = 0; col < out_width; ++col) {
      double fx = (col + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const float wx = static_cast<float>(fx - x0);
      for (int ch = 0; ch < c; ++ch) {
        const float top = src.at(y0, x0, ch) * (1.0f - wx) + src.at(y0, x1, ch) * wx;
        const float bot = src.at(y1, x0, ch) * (1.0f - wx) + src.at(y1, x1, ch) * wx;
        dst.at(r, col, ch) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return dst;
}

Image gaussian_blur(const Image& src, double sigma) {
  check_nonempty(src, "gaussian_blur");
  if (sigma <= 0.0) {
    return src;
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (float& k : kernel) k = static_cast<float>(k / sum);

  const int h = src.height(), w = src.width(), c = src.channels();
  Image tmp(h, w, c);
  // Horizontal pass.
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          const int x = std::clamp(col + k, 0, w - 1);
          acc += kernel[k + radius] * src.at(r, x, ch);
        }
        tmp.at(r, col, ch) = acc;
      }
    }
  }
  // Vertical pass.
  Image dst(h, w, c);
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          const int y = std::clamp(r + k, 0, h - 1);
          acc += kernel[k + radius] * tmp.at(y, col, ch);
        }
        dst.at(r, col, ch) = acc;
      }
    }
  }
  return dst;
}

Image crop(const Image& src, const Box& box) {
  check_nonempty(src, "crop");
  if (box.height <= 0 || box.width <= 0 || box.row0 < 0 || box.col0 < 0 ||
      box.row0 + box.height > src.height() || box.col0 + box.width > src.width()) {
    throw std::invalid_argument("crop: box out of bounds");
  }
  Image dst(box.height, box.width, src.channels());
  for (int r = 0; r < box.height; ++r) {
    const float* in = src.data() +
        (static_cast<size_t>(box.row0 + r) * src.width() + box.col0) * src.channels();
    float* out = dst.data() + static_cast<size_t>(r) * box.width * src.channels();
    std::copy(in, in + static_cast<size_t>(box.width) * src.channels(), out);
  }
  return dst;
}

void clamp01(Image& img) {
  for (float& v : img.raw()) v = std::clamp(v, 0.0f, 1.0f);
}

std::optional<Box> nonzero_bbox(const Image& mask, float threshold) {
  int r0 = mask.height(), r1 = -1, c0 = mask.width(), c1 = -1;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask.at(r, c, 0) > threshold) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
  }
  if (r1 < 0) return std::nullopt;
  return Box{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

Image to_grayscale(const Image& rgb) {
  if (rgb.channels() == 1) return rgb;
  if (rgb.channels() != 3) {
    throw std::invalid_argument("to_grayscale: expected 1 or 3 channels");
  }
  Image out(rgb.height(), rgb.width(), 1);
  for (int r = 0; r < rgb.height(); ++r) {
    for (int c = 0; c < rgb.width(); ++c) {
      out.at(r, c) = 0.299f * rgb.at(r, c, 0) + 0.587f * rgb.at(r, c, 1) +
                     0.114f * rgb.at(r, c, 2);
    }
  }
  return out;
}

Image replicate_channels(const Image& single, int channels) {
  if (single.channels() != 1) {
    throw std::invalid_argument("replicate_channels: source must be single-channel");
  }
  Image out(single.height(), single.width(), channels);
  for (int r = 0; r < single.height(); ++r) {
    for (int c = 0; c < single.width(); ++c) {
      for (int ch = 0; ch < channels; ++ch) out.at(r, c, ch) = single.at(r, c);
    }
  }
  return out;
}

namespace {

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = mx > 0.0f ? d / mx : 0.0f;
  if (d <= 0.0f) {
    h = 0.0f;
    return;
  }
  if (mx == r) {
    h = (g - b) / d;
  } else if (mx == g) {
    h = 2.0f + (b - r) / d;
  } else {
    h = 4.0f + (r - g) / d;
  }
  h /= 6.0f;
  if (h < 0.0f) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  h -= std::floor(h);
  const float hh = h * 6.0f;
  const int i = std::min(5, static_cast<int>(hh));
  const float f = hh - i;
  const float p = v * (1.0f - s);
  const float q = v * (1.0f - s * f);
  const float t = v * (1.0f - s * (1.0f - f));
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

}  // namespace

Image apply_color_jitter(const Image& rgb, const ColorJitter& jitter, Rng& rng) {
  if (rgb.channels() != 3) {
    throw std::invalid_argument("apply_color_jitter: expected RGB image");
  }
  // Draw all factors up front so consuming the RNG is independent of strengths.
  const float fb = static_cast<float>(rng.uniform(1.0 - jitter.brightness, 1.0 + jitter.brightness));
  const float fc = static_cast<float>(rng.uniform(1.0 - jitter.contrast, 1.0 + jitter.contrast));
  const float fs = static_cast<float>(rng.uniform(1.0 - jitter.saturation, 1.0 + jitter.saturation));
  const float fh = static_cast<float>(rng.uniform(-jitter.hue, jitter.hue));

  Image out = rgb;
  for (float& v : out.raw()) v *= fb;
  clamp01(out);

  if (jitter.contrast > 0.0) {
    const Image gray = to_grayscale(out);
    double mean = 0.0;
    for (const float v : gray.raw()) mean += v;
    mean /= static_cast<double>(gray.size());
    const float m = static_cast<float>(mean);
    for (float& v : out.raw()) v = m + fc * (v - m);
    clamp01(out);
  }

  if (jitter.saturation > 0.0 || jitter.hue > 0.0) {
    for (int r = 0; r < out.height(); ++r) {
      for (int c = 0; c < out.width(); ++c) {
        float h, s, v;
        rgb_to_hsv(out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2), h, s, v);
        s = std::clamp(s * fs, 0.0f, 1.0f);
        h += fh;
        hsv_to_rgb(h, s, v, out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2));
      }
    }
    clamp01(out);
  }
  return out;
}

}  // namespace tatret
