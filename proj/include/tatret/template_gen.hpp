#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tatret/image.hpp"

namespace tatret {

/// One tattoo design. `ink` is a square single-channel density grid in [0,1];
/// every template is its own retrieval category.
struct TattooTemplate {
  std::string id;
  int category_label = 0;
  Image ink;
};

/// Procedural stand-in for flash art: 2-6 anti-aliased strokes (capsules,
/// discs, rings, bars, triangles). Deterministic per seed.
/// Throws std::invalid_argument when side < 32.
TattooTemplate generate_glyph_template(uint64_t rng_seed, int side);

/// `count` distinct glyph templates with labels 0..count-1 and ids
/// glyph_0000, glyph_0001, ...
std::vector<TattooTemplate> generate_glyph_set(int count, int side, uint64_t seed);

/// Load dark-on-light template drawings (PNG) from a directory, sorted by
/// filename; ink = 1 - grayscale, resized to `side`. Labels follow sort order.
std::vector<TattooTemplate> load_template_dir(const std::filesystem::path& dir, int side);

}  // namespace tatret
