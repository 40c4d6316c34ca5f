#include "tatret/template_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tatret {

namespace {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double sd_capsule(Vec2 p, Vec2 a, Vec2 b, double r) {
  const Vec2 pa = p - a, ba = b - a;
  const double denom = std::max(dot(ba, ba), 1e-12);
  const double h = std::clamp(dot(pa, ba) / denom, 0.0, 1.0);
  return norm({pa.x - ba.x * h, pa.y - ba.y * h}) - r;
}

double sd_disc(Vec2 p, Vec2 c, double r) { return norm(p - c) - r; }

double sd_ring(Vec2 p, Vec2 c, double r, double half_width) {
  return std::abs(norm(p - c) - r) - half_width;
}

double sd_bar(Vec2 p, Vec2 c, Vec2 half_extent, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const Vec2 d = p - c;
  const Vec2 local{ca * d.x + sa * d.y, -sa * d.x + ca * d.y};
  const Vec2 q{std::abs(local.x) - half_extent.x, std::abs(local.y) - half_extent.y};
  const Vec2 qpos{std::max(q.x, 0.0), std::max(q.y, 0.0)};
  return norm(qpos) + std::min(std::max(q.x, q.y), 0.0);
}

double sd_triangle(Vec2 p, Vec2 p0, Vec2 p1, Vec2 p2) {
  const Vec2 e0 = p1 - p0, e1 = p2 - p1, e2 = p0 - p2;
  const Vec2 v0 = p - p0, v1 = p - p1, v2 = p - p2;
  auto edge = [](Vec2 v, Vec2 e) {
    const double h = std::clamp(dot(v, e) / std::max(dot(e, e), 1e-12), 0.0, 1.0);
    return Vec2{v.x - e.x * h, v.y - e.y * h};
  };
  const Vec2 pq0 = edge(v0, e0), pq1 = edge(v1, e1), pq2 = edge(v2, e2);
  const double s = cross(e0, e2) >= 0.0 ? 1.0 : -1.0;
  const double dx = std::min({dot(pq0, pq0), dot(pq1, pq1), dot(pq2, pq2)});
  const double dy = std::min({s * cross(v0, e0), s * cross(v1, e1), s * cross(v2, e2)});
  return -std::sqrt(dx) * (dy >= 0.0 ? 1.0 : -1.0);
}

struct Stroke {
  int kind = 0;  // 0 capsule, 1 disc, 2 ring, 3 bar, 4 triangle
  Vec2 a, b, c;
  double r0 = 0.0, r1 = 0.0, angle = 0.0;
  double strength = 1.0;
};

double stroke_distance(const Stroke& s, Vec2 p) {
  switch (s.kind) {
    case 0: return sd_capsule(p, s.a, s.b, s.r0);
    case 1: return sd_disc(p, s.a, s.r0);
    case 2: return sd_ring(p, s.a, s.r0, s.r1);
    case 3: return sd_bar(p, s.a, {s.r0, s.r1}, s.angle);
    default: return sd_triangle(p, s.a, s.b, s.c);
  }
}

Stroke random_stroke(Rng& rng, double side) {
  Stroke s;
  s.kind = rng.uniform_int(0, 4);
  s.strength = rng.uniform(0.75, 1.0);
  auto pt = [&] { return Vec2{rng.uniform(0.12, 0.88) * side, rng.uniform(0.12, 0.88) * side}; };
  switch (s.kind) {
    case 0:
      s.a = pt();
      s.b = pt();
      s.r0 = rng.uniform(0.015, 0.05) * side;
      break;
    case 1:
      s.a = pt();
      s.r0 = rng.uniform(0.05, 0.16) * side;
      break;
    case 2:
      s.a = pt();
      s.r0 = rng.uniform(0.08, 0.24) * side;
      s.r1 = rng.uniform(0.012, 0.04) * side;
      break;
    case 3:
      s.a = pt();
      s.r0 = rng.uniform(0.08, 0.3) * side;
      s.r1 = rng.uniform(0.015, 0.06) * side;
      s.angle = rng.uniform(0.0, 3.14159265358979323846);
      break;
    default:
      s.a = pt();
      s.b = pt();
      s.c = pt();
      break;
  }
  return s;
}

}  // namespace

TattooTemplate generate_glyph_template(uint64_t rng_seed, int side) {
  if (side < 32) {
    throw std::invalid_argument("generate_glyph_template: side must be >= 32");
  }
  Rng rng(rng_seed);
  const int n_strokes = rng.uniform_int(2, 6);
  std::vector<Stroke> strokes(n_strokes);
  for (Stroke& s : strokes) s = random_stroke(rng, static_cast<double>(side));

  TattooTemplate tpl;
  tpl.ink = Image(side, side, 1);
  constexpr double kAa = 1.5;  // anti-alias ramp width in pixels
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const Vec2 p{c + 0.5, r + 0.5};
      double ink = 0.0;
      for (const Stroke& s : strokes) {
        const double d = stroke_distance(s, p);
        const double coverage = std::clamp(0.5 - d / kAa, 0.0, 1.0);
        ink = std::max(ink, coverage * s.strength);
      }
      tpl.ink.at(r, c) = static_cast<float>(ink);
    }
  }
  return tpl;
}

std::vector<TattooTemplate> generate_glyph_set(int count, int side, uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("generate_glyph_set: count must be >= 1");
  }
  std::vector<TattooTemplate> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    TattooTemplate tpl = generate_glyph_template(mix64(seed, static_cast<uint64_t>(i)), side);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "glyph_%04d", i);
    tpl.id = buf;
    tpl.category_label = i;
    out.push_back(std::move(tpl));
  }
  return out;
}

std::vector<TattooTemplate> load_template_dir(const std::filesystem::path& dir, int side) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("load_template_dir: not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::invalid_argument("load_template_dir: no .png files in " + dir.string());
  }
  std::vector<TattooTemplate> out;
  out.reserve(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    Image gray = to_grayscale(read_png(files[i]));
    gray = resize_bilinear(gray, side, side);
    TattooTemplate tpl;
    tpl.id = files[i].stem().string();
    tpl.category_label = static_cast<int>(i);
    tpl.ink = Image(side, side, 1);
    for (size_t j = 0; j < gray.size(); ++j) tpl.ink.raw()[j] = 1.0f - gray.raw()[j];
    const bool has_ink = std::any_of(tpl.ink.raw().begin(), tpl.ink.raw().end(),
                                     [](float v) { return v > 0.05f; });
    if (!has_ink) {
      throw std::invalid_argument("load_template_dir: template has no ink: " + files[i].string());
    }
    out.push_back(std::move(tpl));
  }
  return out;
}

}  // namespace tatret
