#include "skill/occupancy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "skill/error.hpp"

namespace skill::motion {

bool OccupancyGrid::world_to_cell(const Vec3& p, int& ix, int& iy,
                                  int& iz) const {
  ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
  iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
  iz = static_cast<int>(std::floor((p.z - origin.z) / resolution));
  // Points on the upper boundary belong to the last cell.
  if (ix == nx && p.x - origin.x <= nx * resolution) ix = nx - 1;
  if (iy == ny && p.y - origin.y <= ny * resolution) iy = ny - 1;
  if (iz == nz && p.z - origin.z <= nz * resolution) iz = nz - 1;
  return in_bounds(ix, iy, iz);
}

double OccupancyGrid::distance_at(const Vec3& p) const {
  int ix, iy, iz;
  if (!world_to_cell(p, ix, iy, iz))
    throw Error("out-of-bounds", "point outside the occupancy grid");
  return distance[index(ix, iy, iz)];
}

bool cell_intersects_box(const Vec3& cell_lo, const Vec3& cell_hi,
                         const ObstacleBox& box) {
  // Separating axis test between an AABB and an OBB.
  Vec3 a_center = (cell_lo + cell_hi) * 0.5;
  Vec3 a_half = (cell_hi - cell_lo) * 0.5;

  const Quat& q = box.pose.orientation;
  Vec3 axes[3] = {q.rotate({1, 0, 0}), q.rotate({0, 1, 0}),
                  q.rotate({0, 0, 1})};
  double b_half[3] = {box.half.x, box.half.y, box.half.z};
  Vec3 t = box.pose.position - a_center;

  auto separated = [&](const Vec3& axis) {
    double len = axis.norm();
    if (len < 1e-12) return false;  // degenerate cross product
    double ra = a_half.x * std::abs(axis.x) + a_half.y * std::abs(axis.y) +
                a_half.z * std::abs(axis.z);
    double rb = 0.0;
    for (int k = 0; k < 3; ++k) rb += b_half[k] * std::abs(axes[k].dot(axis));
    return std::abs(t.dot(axis)) > ra + rb;
  };

  Vec3 world_axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto& a : world_axes)
    if (separated(a)) return false;
  for (const auto& a : axes)
    if (separated(a)) return false;
  for (const auto& a : world_axes)
    for (const auto& b : axes)
      if (separated(a.cross(b))) return false;
  return true;
}

std::vector<ObstacleBox> scene_obstacles(const graph::PropertyGraph& scene,
                                         const std::set<std::string>& exclude) {
  std::vector<ObstacleBox> boxes;
  for (const auto& [id, node] : scene.nodes()) {
    if (exclude.count(id)) continue;
    auto pos = node.position();
    auto ext = node.extent();
    if (!pos || !ext) continue;
    ObstacleBox box;
    box.id = id;
    box.pose = node.pose();
    box.half = *ext;
    boxes.push_back(std::move(box));
  }
  return boxes;
}

OccupancyGrid build_occupancy_grid(const std::vector<ObstacleBox>& obstacles,
                                   const Aabb& bounds, double resolution) {
  if (resolution <= 0.0)
    throw Error("invalid-resolution", "resolution must be positive");
  OccupancyGrid grid;
  grid.origin = bounds.lo;
  grid.resolution = resolution;
  grid.nx = std::max(1, static_cast<int>(
                            std::ceil((bounds.hi.x - bounds.lo.x) / resolution -
                                      1e-9)));
  grid.ny = std::max(1, static_cast<int>(
                            std::ceil((bounds.hi.y - bounds.lo.y) / resolution -
                                      1e-9)));
  grid.nz = std::max(1, static_cast<int>(
                            std::ceil((bounds.hi.z - bounds.lo.z) / resolution -
                                      1e-9)));
  grid.occupied.assign(grid.size(), 0);

  for (const auto& box : obstacles) {
    // Conservative world AABB of the oriented box.
    Vec3 axes[3] = {box.pose.orientation.rotate({1, 0, 0}),
                    box.pose.orientation.rotate({0, 1, 0}),
                    box.pose.orientation.rotate({0, 0, 1})};
    Vec3 r{std::abs(axes[0].x) * box.half.x + std::abs(axes[1].x) * box.half.y +
               std::abs(axes[2].x) * box.half.z,
           std::abs(axes[0].y) * box.half.x + std::abs(axes[1].y) * box.half.y +
               std::abs(axes[2].y) * box.half.z,
           std::abs(axes[0].z) * box.half.x + std::abs(axes[1].z) * box.half.y +
               std::abs(axes[2].z) * box.half.z};
    Vec3 blo = box.pose.position - r;
    Vec3 bhi = box.pose.position + r;
    if (!bounds.contains(blo) || !bounds.contains(bhi))
      throw Error("node-outside-bounds",
                  "obstacle '" + box.id + "' is not enclosed by the bounds");

    int lo[3], hi[3];
    lo[0] = std::max(0, static_cast<int>(
                            std::floor((blo.x - grid.origin.x) / resolution)));
    lo[1] = std::max(0, static_cast<int>(
                            std::floor((blo.y - grid.origin.y) / resolution)));
    lo[2] = std::max(0, static_cast<int>(
                            std::floor((blo.z - grid.origin.z) / resolution)));
    hi[0] = std::min(grid.nx - 1,
                     static_cast<int>(
                         std::floor((bhi.x - grid.origin.x) / resolution)));
    hi[1] = std::min(grid.ny - 1,
                     static_cast<int>(
                         std::floor((bhi.y - grid.origin.y) / resolution)));
    hi[2] = std::min(grid.nz - 1,
                     static_cast<int>(
                         std::floor((bhi.z - grid.origin.z) / resolution)));
    for (int iz = lo[2]; iz <= hi[2]; ++iz)
      for (int iy = lo[1]; iy <= hi[1]; ++iy)
        for (int ix = lo[0]; ix <= hi[0]; ++ix) {
          Vec3 clo{grid.origin.x + ix * resolution,
                   grid.origin.y + iy * resolution,
                   grid.origin.z + iz * resolution};
          Vec3 chi{clo.x + resolution, clo.y + resolution, clo.z + resolution};
          if (cell_intersects_box(clo, chi, box))
            grid.occupied[grid.index(ix, iy, iz)] = 1;
        }
  }

  compute_distance_field(grid);
  return grid;
}

OccupancyGrid build_occupancy_grid(const graph::PropertyGraph& scene,
                                   const Aabb& bounds, double resolution,
                                   const std::set<std::string>& exclude) {
  return build_occupancy_grid(scene_obstacles(scene, exclude), bounds,
                              resolution);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance transform (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf && k == 0) {
      v[0] = q;
      continue;
    }
    double s;
    while (true) {
      int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {  // the whole row is empty
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

void compute_distance_field(OccupancyGrid& grid) {
  size_t total = grid.size();
  std::vector<double> sq(total);
  for (size_t i = 0; i < total; ++i)
    sq[i] = grid.occupied[i] ? 0.0 : kInf;

  int n_max = std::max({grid.nx, grid.ny, grid.nz});
  std::vector<double> f(n_max), d(n_max);
  std::vector<int> v(n_max);
  std::vector<double> z(n_max + 1);

  // Along x.
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix)
        f[ix] = sq[grid.index(ix, iy, iz)];
      f.resize(grid.nx);
      edt_1d(f, d, v, z);
      for (int ix = 0; ix < grid.nx; ++ix)
        sq[grid.index(ix, iy, iz)] = d[ix];
      f.resize(n_max);
    }
  // Along y.
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int ix = 0; ix < grid.nx; ++ix) {
      for (int iy = 0; iy < grid.ny; ++iy)
        f[iy] = sq[grid.index(ix, iy, iz)];
      f.resize(grid.ny);
      edt_1d(f, d, v, z);
      for (int iy = 0; iy < grid.ny; ++iy)
        sq[grid.index(ix, iy, iz)] = d[iy];
      f.resize(n_max);
    }
  // Along z.
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      for (int iz = 0; iz < grid.nz; ++iz)
        f[iz] = sq[grid.index(ix, iy, iz)];
      f.resize(grid.nz);
      edt_1d(f, d, v, z);
      for (int iz = 0; iz < grid.nz; ++iz)
        sq[grid.index(ix, iy, iz)] = d[iz];
      f.resize(n_max);
    }

  grid.distance.resize(total);
  for (size_t i = 0; i < total; ++i)
    grid.distance[i] =
        sq[i] == kInf ? kFreeSentinel : grid.resolution * std::sqrt(sq[i]);
}

void dump_grid(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open '" + path + "' for writing");
  uint32_t header[3] = {static_cast<uint32_t>(grid.nx),
                        static_cast<uint32_t>(grid.ny),
                        static_cast<uint32_t>(grid.nz)};
  uint32_t reserved = 0;
  double res = grid.resolution;
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(&reserved), sizeof(reserved));
  out.write(reinterpret_cast<const char*>(&res), sizeof(res));
  out.write(reinterpret_cast<const char*>(grid.occupied.data()),
            static_cast<std::streamsize>(grid.occupied.size()));
  if (!out) throw Error("io", "write failed for '" + path + "'");
}

}  // namespace skill::motion
