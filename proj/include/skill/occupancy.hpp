#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "skill/geometry.hpp"
#include "skill/graph.hpp"

namespace skill::motion {

/// Distance-field value used where no obstacle exists.
inline constexpr double kFreeSentinel = 1e30;

struct Aabb {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }
};

/// Discretized workspace. `occupied` marks cells intersecting any obstacle
/// box; `distance` holds the exact Euclidean distance (meters) from each
/// cell center to the nearest occupied cell center (0 on occupied cells).
struct OccupancyGrid {
  Vec3 origin;  // world position of the lower corner of cell (0,0,0)
  double resolution = 0.02;
  int nx = 0, ny = 0, nz = 0;
  std::vector<uint8_t> occupied;
  std::vector<double> distance;

  size_t size() const {
    return static_cast<size_t>(nx) * ny * nz;
  }
  size_t index(int ix, int iy, int iz) const {
    return (static_cast<size_t>(iz) * ny + iy) * nx + ix;
  }
  bool in_bounds(int ix, int iy, int iz) const {
    return ix >= 0 && ix < nx && iy >= 0 && iy < ny && iz >= 0 && iz < nz;
  }
  Vec3 cell_center(int ix, int iy, int iz) const {
    return {origin.x + (ix + 0.5) * resolution,
            origin.y + (iy + 0.5) * resolution,
            origin.z + (iz + 0.5) * resolution};
  }
  /// False when the point lies outside the grid.
  bool world_to_cell(const Vec3& p, int& ix, int& iy, int& iz) const;

  bool occupied_at(int ix, int iy, int iz) const {
    return occupied[index(ix, iy, iz)] != 0;
  }
  /// Distance-field lookup for a world point (containing cell's value).
  /// Throws out-of-bounds.
  double distance_at(const Vec3& p) const;
};

/// Oriented box obstacle (center pose plus half-sizes).
struct ObstacleBox {
  std::string id;
  Pose pose;
  Vec3 half;
};

/// Exact axis-aligned-cell vs oriented-box overlap test (separating axes).
bool cell_intersects_box(const Vec3& cell_lo, const Vec3& cell_hi,
                         const ObstacleBox& box);

/// Collects obstacle boxes from scene nodes carrying position + extent,
/// skipping ids in `exclude`.
std::vector<ObstacleBox> scene_obstacles(const graph::PropertyGraph& scene,
                                         const std::set<std::string>& exclude);

/// Rasterizes the scene into a grid and computes the exact distance field.
/// Throws node-outside-bounds and invalid-resolution.
OccupancyGrid build_occupancy_grid(const graph::PropertyGraph& scene,
                                   const Aabb& bounds, double resolution,
                                   const std::set<std::string>& exclude = {});

OccupancyGrid build_occupancy_grid(const std::vector<ObstacleBox>& obstacles,
                                   const Aabb& bounds, double resolution);

/// Exact Euclidean distance transform over occupied cell centers
/// (separable lower-envelope method; matches brute force bit for bit).
void compute_distance_field(OccupancyGrid& grid);

/// Binary debug dump: 24-byte header (uint32 nx, ny, nz, reserved;
/// float64 resolution) followed by nx*ny*nz occupancy bytes, x fastest.
void dump_grid(const OccupancyGrid& grid, const std::string& path);

}  // namespace skill::motion
