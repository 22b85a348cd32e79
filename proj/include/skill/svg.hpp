#pragma once

#include <string>
#include <vector>

#include "skill/planner.hpp"
#include "skill/tactile.hpp"

namespace skill::viz {

/// Contour points (blue dots) and Hough lines (green segments) over the
/// source frame, embedded as a base64 PNG.
std::string contour_overlay_svg(const tactile::TactileImage& image,
                                const tactile::PerceptionResult& result);

/// Top-down (x, y) projection of executed trajectories over the obstacle
/// footprints.
std::string trajectory_svg(const motion::Aabb& bounds,
                           const std::vector<motion::ObstacleBox>& obstacles,
                           const std::vector<motion::Path3D>& trajectories);

}  // namespace skill::viz
