#include "pvs/bench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace pvs::bench {

namespace {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<Series> convergence_series(const csv::Table& t) {
  const std::size_t tc = t.column("time_s");
  std::vector<Series> out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == tc) continue;
    Series s{t.header[c], {}, {}};
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      s.x.push_back(csv::parse_double(t.rows[i][tc], t.row_lines[i]));
      s.y.push_back(csv::parse_double(t.rows[i][c], t.row_lines[i]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Series> ber_series(const csv::Table& t) {
  const std::size_t mc = t.column("method"), sc = t.column("snr_db"), bc = t.column("ber");
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const double snr = csv::parse_double(row[sc], t.row_lines[i]);
    const double ber = csv::parse_double(row[bc], t.row_lines[i]);
    if (!acc.count(row[mc])) order.push_back(row[mc]);
    auto& cell = acc[row[mc]][snr];
    cell.first += ber;
    cell.second += 1;
  }
  std::vector<Series> out;
  for (const auto& name : order) {
    Series s{name, {}, {}};
    for (const auto& [snr, cell] : acc[name]) {
      const double mean = cell.first / cell.second;
      s.x.push_back(snr);
      // A zero average is drawn at machine epsilon so it stays on the log axis.
      s.y.push_back(mean == 0.0 ? std::numeric_limits<double>::epsilon() : mean);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
    ticks.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return ticks;
}

}  // namespace

PlotSpec default_plot_spec(PlotKind kind) {
  PlotSpec spec;
  spec.kind = kind;
  if (kind == PlotKind::convergence) {
    spec.title = "Mean cost vs time";
    spec.x_label = "time (s)";
    spec.y_label = "cost";
    spec.log_y = true;
  } else {
    spec.title = "Mean BER vs SNR";
    spec.x_label = "SNR (dB)";
    spec.y_label = "BER";
    spec.log_y = true;
  }
  return spec;
}

PlotResult render_plot(const csv::Table& table, const PlotSpec& spec) {
  PlotResult res;
  std::vector<Series> series =
      spec.kind == PlotKind::convergence ? convergence_series(table) : ber_series(table);

  if (spec.log_y) {
    for (auto& s : series) {
      std::size_t dropped = 0;
      Series kept{s.name, {}, {}};
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.y[i] > 0.0 && std::isfinite(s.y[i]) && std::isfinite(s.x[i])) {
          kept.x.push_back(s.x[i]);
          kept.y.push_back(s.y[i]);
        } else {
          ++dropped;
        }
      }
      if (dropped)
        res.warnings.push_back("series '" + s.name + "': dropped " + std::to_string(dropped) +
                               " nonpositive or non-finite points on the log axis");
      s = std::move(kept);
    }
  }

  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmin <= xmax)) {
    res.warnings.push_back("no data rows; drawing axes only");
    xmin = 0.0;
    xmax = 1.0;
    ymin = spec.log_y ? 1e-3 : 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }

  // y range in plot coordinates (log10 for log axes).
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  double ylo = ty(ymin), yhi = ty(ymax);
  if (spec.log_y) {
    ylo = std::floor(ylo);
    yhi = std::ceil(yhi);
  }
  if (yhi == ylo) {
    ylo -= spec.log_y ? 1.0 : 0.5;
    yhi += spec.log_y ? 1.0 : 0.5;
  }

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - ylo) / (yhi - ylo)) * ph; };
  auto py_plot = [&](double t) { return top + (1.0 - (t - ylo) / (yhi - ylo)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(spec.title) << "</text>\n";
  svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double xt : linear_ticks(xmin, xmax)) {
    svg << "<line x1=\"" << fmt(px(xt)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(xt))
        << "\" y2=\"" << fmt(top + ph + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(px(xt)) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(xt) << "</text>\n";
  }
  std::vector<double> yticks;
  if (spec.log_y) {
    const int decades = static_cast<int>(yhi - ylo);
    const int stride = std::max(1, decades / 8);
    for (int k = static_cast<int>(ylo); k <= static_cast<int>(yhi); k += stride) yticks.push_back(k);
  } else {
    yticks = linear_ticks(ylo, yhi);
  }
  for (double t : yticks) {
    svg << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(py_plot(t)) << "\" x2=\""
        << fmt(left) << "\" y2=\"" << fmt(py_plot(t)) << "\" stroke=\"black\"/>\n";
    const std::string label =
        spec.log_y ? "1e" + std::to_string(static_cast<int>(t)) : tick_label(t);
    svg << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py_plot(t) + 4)
        << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(spec.height - 15.0)
      << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << fmt(top + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    if (!s.x.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
      svg << "\"/>\n";
      if (spec.marker_every > 0)
        for (std::size_t i = 0; i < s.x.size(); i += static_cast<std::size_t>(spec.marker_every))
          svg << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
              << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    svg << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(left + pw + 36) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(left + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  res.svg = svg.str();
  return res;
}

std::vector<std::string> emit_plot(const std::string& csv_path, const PlotSpec& spec,
                                   const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  const csv::Table table = csv::read_table(in);
  PlotResult res = render_plot(table, spec);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + svg_path);
  out << res.svg;
  return res.warnings;
}

}  // namespace pvs::bench
