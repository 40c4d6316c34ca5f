#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tatret/evalkit.hpp"
#include "tatret/image.hpp"

namespace tatret {

/// One polyline with an optional symmetric error band around y.
struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // same length as y, or empty
  std::array<float, 3> color{0.12f, 0.35f, 0.80f};
  std::string label;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 540;
  // Values at or below zero cannot sit on a log axis; they are floored here.
  double log_floor = 1e-4;
};

/// Minimal raster line chart (axes, ticks, 5x7 caps font) written as PNG.
void render_plot(const std::filesystem::path& out_png, const PlotSpec& spec,
                 const std::vector<PlotSeries>& series);

/// Rank vs identification rate, with the +/- std band.
void plot_cmc(const std::filesystem::path& out_png, const CMCCurve& curve);

/// FPIR vs FNIR trade-off on log-log axes.
void plot_det(const std::filesystem::path& out_png, const AggregatedDET& curve);

}  // namespace tatret
