#pragma once

// Shared test utilities: independent oracles (Dijkstra, brute-force
// distance transform, rotation-matrix products) and small fixture builders.
// These must stay independent of the implementation paths they check.

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "skill/geometry.hpp"
#include "skill/graph.hpp"
#include "skill/occupancy.hpp"

namespace testutil {

// --- Dijkstra oracle over the 26-connected grid (step-length metric) -------

struct DijkstraResult {
  bool reachable = false;
  double cost = 0.0;  // res * (a + sqrt(2) b + sqrt(3) c)
};

inline DijkstraResult dijkstra_cost(const skill::motion::OccupancyGrid& grid,
                                    int sx, int sy, int sz, int gx, int gy,
                                    int gz) {
  using Grid = skill::motion::OccupancyGrid;
  const Grid& g = grid;
  size_t n = g.size();
  size_t start = g.index(sx, sy, sz), goal = g.index(gx, gy, gz);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::array<long, 3>> counts(n, {0, 0, 0});
  std::vector<uint8_t> done(n, 0);
  using Entry = std::pair<double, size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
  dist[start] = 0.0;
  pq.push({0.0, start});
  const double res = g.resolution;
  const double steps[4] = {0.0, res, res * std::sqrt(2.0),
                           res * std::sqrt(3.0)};
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == goal) break;
    int uz = static_cast<int>(u / (static_cast<size_t>(g.nx) * g.ny));
    size_t rem = u % (static_cast<size_t>(g.nx) * g.ny);
    int uy = static_cast<int>(rem / g.nx);
    int ux = static_cast<int>(rem % g.nx);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy && !dz) continue;
          int vx = ux + dx, vy = uy + dy, vz = uz + dz;
          if (!g.in_bounds(vx, vy, vz)) continue;
          size_t v = g.index(vx, vy, vz);
          if (done[v] || g.occupied[v]) continue;
          int manh = std::abs(dx) + std::abs(dy) + std::abs(dz);
          double nd = d + steps[manh];
          if (nd < dist[v]) {
            dist[v] = nd;
            counts[v] = counts[u];
            counts[v][manh - 1] += 1;
            pq.push({nd, v});
          }
        }
  }
  DijkstraResult out;
  if (!done[goal]) return out;
  out.reachable = true;
  auto [a, b, c] = counts[goal];
  out.cost = res * (static_cast<double>(a) +
                    std::sqrt(2.0) * static_cast<double>(b) +
                    std::sqrt(3.0) * static_cast<double>(c));
  return out;
}

// --- Brute-force exact distance field (meters, to occupied cell centers) ---

inline std::vector<double> brute_distance_field(
    const skill::motion::OccupancyGrid& g) {
  std::vector<std::array<int, 3>> occ;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x)
        if (g.occupied[g.index(x, y, z)]) occ.push_back({x, y, z});
  std::vector<double> out(g.size(), skill::motion::kFreeSentinel);
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        double best_sq = std::numeric_limits<double>::infinity();
        for (const auto& [ox, oy, oz] : occ) {
          double dx = x - ox, dy = y - oy, dz = z - oz;
          best_sq = std::min(best_sq, dx * dx + dy * dy + dz * dz);
        }
        if (best_sq != std::numeric_limits<double>::infinity())
          out[g.index(x, y, z)] = g.resolution * std::sqrt(best_sq);
      }
  return out;
}

// --- Quaternion-to-matrix oracle (independent of skill::Quat::rotate) ------

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 quat_to_matrix(const skill::Quat& q) {
  double w = q.w, x = q.x, y = q.y, z = q.z;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x),
            1 - 2 * (x * x + y * y)}}};
}

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      out[i][j] = s;
    }
  return out;
}

inline double mat_distance(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  return worst;
}

inline skill::Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  skill::Quat q{n(rng), n(rng), n(rng), n(rng)};
  return q.normalized();
}

/// Max component difference after sign alignment (acos-based angles bottom
/// out near 3e-8 and cannot express 1e-9 tolerances).
inline double quat_component_distance(const skill::Quat& a,
                                      const skill::Quat& b) {
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  double s = dot >= 0.0 ? 1.0 : -1.0;
  double worst = std::abs(a.w - s * b.w);
  worst = std::max(worst, std::abs(a.x - s * b.x));
  worst = std::max(worst, std::abs(a.y - s * b.y));
  worst = std::max(worst, std::abs(a.z - s * b.z));
  return worst;
}

// --- Random valid property graphs (round-trip property inputs) -------------

inline skill::graph::PropertyGraph random_graph(std::mt19937_64& rng) {
  using namespace skill::graph;
  std::uniform_int_distribution<int> kind_pick(0, 2);
  GraphKind kind = static_cast<GraphKind>(kind_pick(rng));
  PropertyGraph g(kind);
  std::uniform_int_distribution<int> n_nodes(0, 12);
  std::uniform_real_distribution<double> real(-10.0, 10.0);
  std::uniform_int_distribution<int> coin(0, 1);
  int count = n_nodes(rng);
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    Node n;
    n.id = "n" + std::to_string(i);
    if (coin(rng)) n.labels.insert("object");
    if (coin(rng)) n.labels.insert("special");
    Json attrs = Json::object();
    if (coin(rng)) attrs["value"] = real(rng);
    if (coin(rng)) attrs["count"] = static_cast<int64_t>(rng() % 1000);
    if (coin(rng)) attrs["name"] = "weird \"chars\"\n\t" + std::to_string(i);
    if (coin(rng)) attrs["flag"] = coin(rng) == 1;
    if (coin(rng))
      attrs["position"] = Json::array({real(rng), real(rng), real(rng)});
    if (coin(rng)) {
      double a = real(rng), b = real(rng), c = real(rng), d = real(rng) + 0.1;
      double norm = std::sqrt(a * a + b * b + c * c + d * d);
      attrs["orientation"] =
          Json::array({a / norm, b / norm, c / norm, d / norm});
    }
    n.attributes = std::move(attrs);
    ids.push_back(g.add_node(std::move(n)));
  }
  if (ids.size() >= 2) {
    std::uniform_int_distribution<size_t> pick(0, ids.size() - 1);
    std::uniform_int_distribution<int> n_edges(0, 8);
    const char* task_rel[] = {"start", "next", "end"};
    const char* scene_rel[] = {"attach", "on", "inside", "near"};
    int edges = n_edges(rng);
    for (int e = 0; e < edges; ++e) {
      std::string rel =
          kind == GraphKind::task
              ? task_rel[rng() % 3]
              : kind == GraphKind::scene ? scene_rel[rng() % 4] : "binds";
      Json attrs = Json::object();
      if (coin(rng)) attrs["weight"] = real(rng);
      g.add_edge("e" + std::to_string(e), ids[pick(rng)], ids[pick(rng)], rel,
                 attrs);
    }
  }
  return g;
}

// --- Small scene builders ---------------------------------------------------

inline skill::graph::PropertyGraph box_scene(
    const std::vector<std::tuple<std::string, skill::Vec3, skill::Vec3>>&
        boxes) {
  using namespace skill::graph;
  PropertyGraph scene(GraphKind::scene);
  for (const auto& [id, pos, half] : boxes) {
    Node n;
    n.id = id;
    n.labels = {"object"};
    n.attributes = Json{{"position", Json::array({pos.x, pos.y, pos.z})},
                        {"extent", Json::array({half.x, half.y, half.z})}};
    scene.add_node(std::move(n));
  }
  return scene;
}

}  // namespace testutil
