#include "tatret/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tatret {

namespace {

// 5x7 caps font; 5 LSBs per row.
struct Glyph {
  char ch;
  uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'=', {0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
};

const Glyph* find_glyph(char ch) {
  if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
  for (const Glyph& g : kFont) {
    if (g.ch == ch) return &g;
  }
  return nullptr;
}

struct Canvas {
  Image img;

  Canvas(int w, int h) : img(h, w, 3, 1.0f) {}

  void put(int r, int c, const std::array<float, 3>& color) {
    if (r < 0 || r >= img.height() || c < 0 || c >= img.width()) return;
    for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = color[ch];
  }

  void line(double r0, double c0, double r1, double c1, const std::array<float, 3>& color) {
    const double dr = r1 - r0, dc = c1 - c0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dr), std::abs(dc)))));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      put(static_cast<int>(std::lround(r0 + t * dr)),
          static_cast<int>(std::lround(c0 + t * dc)), color);
    }
  }

  void thick_line(double r0, double c0, double r1, double c1,
                  const std::array<float, 3>& color) {
    line(r0, c0, r1, c1, color);
    line(r0 + 1, c0, r1 + 1, c1, color);
    line(r0, c0 + 1, r1, c1 + 1, color);
  }

  void vspan(int c, int r0, int r1, const std::array<float, 3>& color) {
    if (r0 > r1) std::swap(r0, r1);
    for (int r = r0; r <= r1; ++r) put(r, c, color);
  }

  void text(int r, int c, const std::string& s, const std::array<float, 3>& color) {
    for (const char ch : s) {
      const Glyph* g = find_glyph(ch);
      if (g) {
        for (int gr = 0; gr < 7; ++gr) {
          for (int gc = 0; gc < 5; ++gc) {
            if (g->rows[gr] & (1 << (4 - gc))) put(r + gr, c + gc, color);
          }
        }
      }
      c += 6;
    }
  }
};

constexpr std::array<float, 3> kBlack{0.05f, 0.05f, 0.05f};
constexpr std::array<float, 3> kGridGray{0.88f, 0.88f, 0.88f};

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= mult * mag) {
      step = mult * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    ticks.push_back(v);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int d0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
  const int d1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
  for (int d = d0; d <= d1; ++d) ticks.push_back(std::pow(10.0, d));
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

}  // namespace

void render_plot(const std::filesystem::path& out_png, const PlotSpec& spec,
                 const std::vector<PlotSeries>& series) {
  if (series.empty()) {
    throw std::invalid_argument("render_plot: no series");
  }
  const int left = 64, right = 16, top = 28, bottom = 42;
  const int pw = spec.width - left - right;
  const int ph = spec.height - top - bottom;
  if (pw < 32 || ph < 32) {
    throw std::invalid_argument("render_plot: canvas too small");
  }

  auto sanitize = [&](double v, bool log_axis) {
    return log_axis ? std::max(v, spec.log_floor) : v;
  };

  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size() || (!s.band.empty() && s.band.size() != s.y.size())) {
      throw std::invalid_argument("render_plot: series length mismatch");
    }
    for (size_t i = 0; i < s.x.size(); ++i) {
      const double x = sanitize(s.x[i], spec.log_x);
      const double band = s.band.empty() ? 0.0 : s.band[i];
      const double ylo = sanitize(s.y[i] - band, spec.log_y);
      const double yhi = sanitize(s.y[i] + band, spec.log_y);
      if (!std::isfinite(x) || !std::isfinite(ylo) || !std::isfinite(yhi)) continue;
      if (first) {
        x_lo = x_hi = x;
        y_lo = ylo;
        y_hi = yhi;
        first = false;
      } else {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, ylo);
        y_hi = std::max(y_hi, yhi);
      }
    }
  }
  if (first) {
    throw std::invalid_argument("render_plot: no finite points");
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  if (!spec.log_y) {
    const double pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  auto xt = [&](double v) {
    v = sanitize(v, spec.log_x);
    const double t = spec.log_x ? (std::log10(v) - std::log10(x_lo)) /
                                      (std::log10(x_hi) - std::log10(x_lo))
                                : (v - x_lo) / (x_hi - x_lo);
    return left + t * pw;
  };
  auto yt = [&](double v) {
    v = sanitize(v, spec.log_y);
    const double t = spec.log_y ? (std::log10(v) - std::log10(y_lo)) /
                                      (std::log10(y_hi) - std::log10(y_lo))
                                : (v - y_lo) / (y_hi - y_lo);
    return top + (1.0 - t) * ph;
  };

  Canvas canvas(spec.width, spec.height);

  const std::vector<double> xticks =
      spec.log_x ? log_ticks(x_lo, x_hi) : linear_ticks(x_lo, x_hi);
  const std::vector<double> yticks =
      spec.log_y ? log_ticks(y_lo, y_hi) : linear_ticks(y_lo, y_hi);
  for (const double v : xticks) {
    canvas.line(top, xt(v), top + ph, xt(v), kGridGray);
  }
  for (const double v : yticks) {
    canvas.line(yt(v), left, yt(v), left + pw, kGridGray);
  }

  // Error bands under the lines.
  for (const PlotSeries& s : series) {
    if (s.band.empty()) continue;
    std::array<float, 3> band_color;
    for (int ch = 0; ch < 3; ++ch) band_color[ch] = 0.65f + 0.35f * s.color[ch];
    for (size_t i = 0; i + 1 < s.x.size(); ++i) {
      const double c0 = xt(s.x[i]), c1 = xt(s.x[i + 1]);
      for (int c = static_cast<int>(std::lround(c0)); c <= std::lround(c1); ++c) {
        const double t = c1 == c0 ? 0.0 : (c - c0) / (c1 - c0);
        const double y = s.y[i] + t * (s.y[i + 1] - s.y[i]);
        const double b = s.band[i] + t * (s.band[i + 1] - s.band[i]);
        canvas.vspan(c, static_cast<int>(std::lround(yt(y + b))),
                     static_cast<int>(std::lround(yt(y - b))), band_color);
      }
    }
  }

  for (const PlotSeries& s : series) {
    for (size_t i = 0; i + 1 < s.x.size(); ++i) {
      canvas.thick_line(yt(s.y[i]), xt(s.x[i]), yt(s.y[i + 1]), xt(s.x[i + 1]), s.color);
    }
    if (s.x.size() == 1) {
      canvas.put(static_cast<int>(yt(s.y[0])), static_cast<int>(xt(s.x[0])), s.color);
    }
  }

  // Axes on top of everything.
  canvas.line(top, left, top + ph, left, kBlack);
  canvas.line(top + ph, left, top + ph, left + pw, kBlack);
  for (const double v : xticks) {
    canvas.line(top + ph, xt(v), top + ph + 4, xt(v), kBlack);
    const std::string label = format_tick(v);
    canvas.text(top + ph + 8, static_cast<int>(xt(v)) - 3 * static_cast<int>(label.size()),
                label, kBlack);
  }
  for (const double v : yticks) {
    canvas.line(yt(v), left - 4, yt(v), left, kBlack);
    const std::string label = format_tick(v);
    canvas.text(static_cast<int>(yt(v)) - 3,
                left - 8 - 6 * static_cast<int>(label.size()), label, kBlack);
  }

  canvas.text(8, left, spec.title, kBlack);
  canvas.text(spec.height - 12, left + pw / 2 - 3 * static_cast<int>(spec.x_label.size()),
              spec.x_label, kBlack);
  canvas.text(top - 10, 4, spec.y_label, kBlack);

  // Legend, top-right corner of the plot area.
  int legend_row = top + 6;
  for (const PlotSeries& s : series) {
    if (s.label.empty()) continue;
    const int c0 = left + pw - 6 * static_cast<int>(s.label.size()) - 28;
    canvas.thick_line(legend_row + 3, c0, legend_row + 3, c0 + 18, s.color);
    canvas.text(legend_row, c0 + 24, s.label, kBlack);
    legend_row += 12;
  }

  write_png(out_png, canvas.img);
}

void plot_cmc(const std::filesystem::path& out_png, const CMCCurve& curve) {
  PlotSeries s;
  s.x.assign(curve.ranks.begin(), curve.ranks.end());
  s.y = curve.mean_ir;
  s.band = curve.std_ir;
  s.color = {0.12f, 0.35f, 0.80f};
  s.label = "MEAN IR";
  PlotSpec spec;
  spec.title = "CMC";
  spec.x_label = "RANK";
  spec.y_label = "IR";
  render_plot(out_png, spec, {s});
}

void plot_det(const std::filesystem::path& out_png, const AggregatedDET& curve) {
  PlotSeries s;
  s.color = {0.75f, 0.20f, 0.15f};
  s.label = "MEAN";
  for (size_t i = 0; i < curve.thresholds.size(); ++i) {
    if (!std::isfinite(curve.mean_fpir[i]) || !std::isfinite(curve.mean_fnir[i])) continue;
    s.x.push_back(curve.mean_fpir[i]);
    s.y.push_back(curve.mean_fnir[i]);
  }
  PlotSpec spec;
  spec.title = "DET";
  spec.x_label = "FPIR";
  spec.y_label = "FNIR";
  spec.log_x = true;
  spec.log_y = true;
  render_plot(out_png, spec, {s});
}

}  // namespace tatret
