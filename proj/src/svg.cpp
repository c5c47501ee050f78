#include "mgral/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace mgral {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 28.0;
constexpr double kBottom = 52.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt_num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

std::string render_curve_svg(const std::vector<CurveRow>& rows) {
  require(!rows.empty(), "no curve rows to plot");

  // strategy -> cycle -> (labeled, perf sum, count); averaged over seeds.
  std::map<std::string, std::map<int, std::tuple<int, double, int>>> series;
  for (const auto& r : rows) {
    auto& cell = series[r.strategy][r.cycle];
    std::get<0>(cell) = r.labeled;
    std::get<1>(cell) += r.performance;
    std::get<2>(cell) += 1;
  }

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (const auto& [name, pts] : series) {
    for (const auto& [cycle, cell] : pts) {
      const double x = std::get<0>(cell);
      const double y = std::get<1>(cell) / std::get<2>(cell);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  double y_pad = (y_max - y_min) * 0.08;
  if (y_pad == 0.0) y_pad = 0.05;
  y_min -= y_pad;
  y_max += y_pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) {
    return kLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  auto sy = [&](double y) {
    return kTop + (y_max - y) / (y_max - y_min) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" fill=\"white\"/>\n";

  // frame + ticks
  svg << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    const double px = sx(fx);
    const double py = sy(fy);
    svg << "  <line x1=\"" << px << "\" y1=\"" << kTop + plot_h << "\" x2=\""
        << px << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << px << "\" y=\"" << kTop + plot_h + 20
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << fmt_num(fx) << "</text>\n";
    svg << "  <line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\""
        << kLeft << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << fmt_num(fy) << "</text>\n";
  }
  svg << "  <text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">labeled samples</text>\n";
  svg << "  <text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">performance</text>\n";

  int color = 0;
  double legend_y = kTop + 10.0;
  for (const auto& [name, pts] : series) {
    const char* stroke =
        kPalette[color % (sizeof kPalette / sizeof kPalette[0])];
    svg << "  <polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [cycle, cell] : pts) {
      const double x = std::get<0>(cell);
      const double y = std::get<1>(cell) / std::get<2>(cell);
      if (!first) svg << ' ';
      svg << fmt_num(sx(x)) << ',' << fmt_num(sy(y));
      first = false;
    }
    svg << "\"/>\n";

    const double lx = kLeft + plot_w - 130.0;
    svg << "  <line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\""
        << lx + 24 << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << lx + 30 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << name
        << "</text>\n";
    legend_y += 18.0;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_curve_svg(const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path) {
  const std::vector<CurveRow> rows = read_curve_csv(csv_path);
  require(!rows.empty(),
          "curves file " + csv_path.string() + " has a header but no rows");
  const std::string svg = render_curve_svg(rows);
  std::ofstream out(svg_path, std::ios::binary);
  require(out.good(), "cannot write SVG: " + svg_path.string());
  out << svg;
}

}  // namespace mgral
