#include "tatret/skin.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace tatret {

SkinBase generate_skin_base(uint64_t seed, int height, int width) {
  if (height < 8 || width < 8) {
    throw std::invalid_argument("generate_skin_base: size must be >= 8");
  }
  Rng rng(seed);
  // Tone between a light and a deep complexion.
  const double t = rng.uniform();
  const float light[3] = {0.94f, 0.80f, 0.70f};
  const float deep[3] = {0.45f, 0.30f, 0.22f};
  float tone[3];
  for (int c = 0; c < 3; ++c) {
    tone[c] = static_cast<float>(light[c] + t * (deep[c] - light[c]));
  }

  // Coarse mottling: a small noise grid upsampled over the patch.
  const int gh = std::max(2, height / 32), gw = std::max(2, width / 32);
  Image coarse(gh, gw, 3);
  for (float& v : coarse.raw()) v = static_cast<float>(rng.normal() * 0.035);
  coarse = resize_bilinear(coarse, height, width);

  SkinBase base;
  base.image = Image(height, width, 3);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const float grain = static_cast<float>(rng.normal() * 0.008);
      for (int ch = 0; ch < 3; ++ch) {
        base.image.at(r, c, ch) = tone[ch] + coarse.at(r, c, ch) + grain;
      }
    }
  }
  clamp01(base.image);
  return base;
}

std::vector<SkinBase> generate_skin_pool(int count, int height, int width, uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("generate_skin_pool: count must be >= 1");
  }
  std::vector<SkinBase> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    SkinBase base = generate_skin_base(mix64(seed, static_cast<uint64_t>(i)), height, width);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "skin_%04d", i);
    base.id = buf;
    out.push_back(std::move(base));
  }
  return out;
}

std::vector<SkinBase> load_skin_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("load_skin_dir: not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::invalid_argument("load_skin_dir: no .png files in " + dir.string());
  }
  std::vector<SkinBase> out;
  out.reserve(files.size());
  for (const auto& file : files) {
    SkinBase base;
    base.id = file.stem().string();
    Image img = read_png(file);
    base.image = img.channels() == 3 ? std::move(img) : replicate_channels(img, 3);
    out.push_back(std::move(base));
  }
  return out;
}

}  // namespace tatret
