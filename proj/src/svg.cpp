#include "skill/svg.hpp"

#include <cmath>
#include <sstream>

#include "skill/image.hpp"

namespace skill::viz {

std::string contour_overlay_svg(const tactile::TactileImage& image,
                                const tactile::PerceptionResult& result) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << image.width
      << "\" height=\"" << image.height << "\" viewBox=\"0 0 " << image.width
      << " " << image.height << "\">\n";
  svg << "<image width=\"" << image.width << "\" height=\"" << image.height
      << "\" href=\"data:image/png;base64,"
      << tactile::base64_encode(tactile::encode_png(image)) << "\"/>\n";

  svg << "<g fill=\"#2060ff\" fill-opacity=\"0.8\">\n";
  for (const auto& p : result.contours.points)
    svg << "<rect x=\"" << p.x << "\" y=\"" << p.y << "\" width=\"1\" "
        << "height=\"1\"/>\n";
  svg << "</g>\n";

  double reach = std::hypot(image.width, image.height);
  svg << "<g stroke=\"#10c040\" stroke-width=\"1.2\">\n";
  for (const auto& line : result.lines.lines) {
    double cx = line.rho * std::cos(line.theta);
    double cy = line.rho * std::sin(line.theta);
    double dx = -std::sin(line.theta), dy = std::cos(line.theta);
    svg << "<line x1=\"" << cx - reach * dx << "\" y1=\"" << cy - reach * dy
        << "\" x2=\"" << cx + reach * dx << "\" y2=\"" << cy + reach * dy
        << "\"/>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string trajectory_svg(const motion::Aabb& bounds,
                           const std::vector<motion::ObstacleBox>& obstacles,
                           const std::vector<motion::Path3D>& trajectories) {
  const double scale = 600.0 / std::max(bounds.hi.x - bounds.lo.x,
                                        bounds.hi.y - bounds.lo.y);
  auto px = [&](double x) { return (x - bounds.lo.x) * scale; };
  auto py = [&](double y) {
    return (bounds.hi.y - y) * scale;  // y up in world, down in SVG
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << px(bounds.hi.x) << "\" height=\"" << py(bounds.lo.y) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";

  svg << "<g fill=\"#b0b0b8\" stroke=\"#707078\">\n";
  for (const auto& box : obstacles) {
    // Footprint corners in the xy-plane.
    svg << "<polygon points=\"";
    const double sx[4] = {1, 1, -1, -1};
    const double sy[4] = {1, -1, -1, 1};
    for (int k = 0; k < 4; ++k) {
      Vec3 corner = box.pose.position +
                    box.pose.orientation.rotate(
                        {sx[k] * box.half.x, sy[k] * box.half.y, 0.0});
      svg << px(corner.x) << "," << py(corner.y) << (k < 3 ? " " : "");
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n";

  const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2"};
  for (size_t i = 0; i < trajectories.size(); ++i) {
    svg << "<polyline fill=\"none\" stroke=\"" << colors[i % 7]
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& wp : trajectories[i].waypoints)
      svg << px(wp.position.x) << "," << py(wp.position.y) << " ";
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace skill::viz
