#ifndef MGRAL_SVG_HPP
#define MGRAL_SVG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "mgral/experiment.hpp"

namespace mgral {

// Renders the seed-averaged learning curves: one polyline per strategy,
// labeled count on the x axis, performance on the y axis, plus axes and
// a legend. Returns the SVG text.
std::string render_curve_svg(const std::vector<CurveRow>& rows);

// CSV in, standalone SVG file out. A header-only CSV is an error and no
// output file is written.
void emit_curve_svg(const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path);

}  // namespace mgral

#endif  // MGRAL_SVG_HPP
