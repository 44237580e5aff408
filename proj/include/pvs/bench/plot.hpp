#pragma once

#include <string>
#include <vector>

#include "pvs/csv.hpp"

namespace pvs::bench {

enum class PlotKind {
  /// Wide table: time_s column plus one mean-cost column per method.
  convergence,
  /// Tidy table with method, snr_db, ber columns; plotted as mean BER per method.
  ber,
};

struct PlotSpec {
  PlotKind kind = PlotKind::ber;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = true;
  /// Draw a marker on every k-th point of each series (0 disables).
  int marker_every = 0;
  int width = 720;
  int height = 480;
};

PlotSpec default_plot_spec(PlotKind kind);

struct PlotResult {
  std::string svg;
  std::vector<std::string> warnings;
};

/// Renders a deterministic SVG. Throws csv::ParseError on schema mismatch.
PlotResult render_plot(const csv::Table& table, const PlotSpec& spec);

/// Reads `csv_path`, renders, writes `svg_path`; returns warnings.
std::vector<std::string> emit_plot(const std::string& csv_path, const PlotSpec& spec,
                                   const std::string& svg_path);

}  // namespace pvs::bench
