#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tatret/image.hpp"

namespace tatret {

/// Background image a tattoo is blended onto.
struct SkinBase {
  std::string id;
  Image image;  // RGB, [0,1]
};

/// Procedural skin patch: a sampled tone plus low-frequency mottling and
/// fine grain. Deterministic per seed.
SkinBase generate_skin_base(uint64_t seed, int height, int width);

std::vector<SkinBase> generate_skin_pool(int count, int height, int width, uint64_t seed);

/// Load RGB (or gray, replicated) PNGs from a directory, sorted by filename.
std::vector<SkinBase> load_skin_dir(const std::filesystem::path& dir);

}  // namespace tatret
