// Copyright 2026 The boxdeform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Evaluation metrics: curvature change, self-intersection, normal
// consistency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>

#include "boxdeform/error.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

namespace {

double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

using Vec2 = Eigen::Vector2d;

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment_2d(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect_2d(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                           const Vec2& q2) {
  int d1 = sign(orient2d(q1, q2, p1));
  int d2 = sign(orient2d(q1, q2, p2));
  int d3 = sign(orient2d(p1, p2, q1));
  int d4 = sign(orient2d(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment_2d(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment_2d(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment_2d(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment_2d(p1, p2, q2)) return true;
  return false;
}

bool point_in_triangle_2d(const Vec2& p, const Vec2& a, const Vec2& b,
                          const Vec2& c) {
  int s1 = sign(orient2d(a, b, p));
  int s2 = sign(orient2d(b, c, p));
  int s3 = sign(orient2d(c, a, p));
  bool has_neg = s1 < 0 || s2 < 0 || s3 < 0;
  bool has_pos = s1 > 0 || s2 > 0 || s3 > 0;
  return !(has_neg && has_pos);
}

// Projects onto the coordinate plane best aligned with `normal`.
struct Projector {
  int u, v;
  explicit Projector(const Vec3& normal) {
    Vec3 a = normal.cwiseAbs();
    int drop = a.x() >= a.y() ? (a.x() >= a.z() ? 0 : 2) : (a.y() >= a.z() ? 1 : 2);
    u = (drop + 1) % 3;
    v = (drop + 2) % 3;
  }
  Vec2 operator()(const Vec3& p) const { return {p[u], p[v]}; }
};

bool coplanar_segment_triangle(const Vec3& p, const Vec3& q, const Vec3& a,
                               const Vec3& b, const Vec3& c) {
  Projector proj((b - a).cross(c - a));
  Vec2 p2 = proj(p), q2 = proj(q), a2 = proj(a), b2 = proj(b), c2 = proj(c);
  if (point_in_triangle_2d(p2, a2, b2, c2) ||
      point_in_triangle_2d(q2, a2, b2, c2))
    return true;
  return segments_intersect_2d(p2, q2, a2, b2) ||
         segments_intersect_2d(p2, q2, b2, c2) ||
         segments_intersect_2d(p2, q2, c2, a2);
}

bool segment_triangle(const Vec3& p, const Vec3& q, const Vec3& a,
                      const Vec3& b, const Vec3& c) {
  int sp = sign(orient3d(a, b, c, p));
  int sq = sign(orient3d(a, b, c, q));
  if (sp * sq > 0) return false;
  if (sp == 0 && sq == 0) return coplanar_segment_triangle(p, q, a, b, c);
  int s1 = sign(orient3d(p, q, a, b));
  int s2 = sign(orient3d(p, q, b, c));
  int s3 = sign(orient3d(p, q, c, a));
  return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

bool degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm() < kDegenerateArea;
}

}  // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2) {
  int da0 = sign(orient3d(b0, b1, b2, a0));
  int da1 = sign(orient3d(b0, b1, b2, a1));
  int da2 = sign(orient3d(b0, b1, b2, a2));
  if (da0 == da1 && da1 == da2 && da0 != 0) return false;
  int db0 = sign(orient3d(a0, a1, a2, b0));
  int db1 = sign(orient3d(a0, a1, a2, b1));
  int db2 = sign(orient3d(a0, a1, a2, b2));
  if (db0 == db1 && db1 == db2 && db0 != 0) return false;

  return segment_triangle(a0, a1, b0, b1, b2) ||
         segment_triangle(a1, a2, b0, b1, b2) ||
         segment_triangle(a2, a0, b0, b1, b2) ||
         segment_triangle(b0, b1, a0, a1, a2) ||
         segment_triangle(b1, b2, a0, a1, a2) ||
         segment_triangle(b2, b0, a0, a1, a2);
}

std::vector<double> angle_deficits(const Mesh& mesh) {
  std::vector<double> k(mesh.vertices.size(), 2.0 * std::numbers::pi);
  for (const auto& t : mesh.faces) {
    const Vec3& p0 = mesh.vertices[t[0]];
    const Vec3& p1 = mesh.vertices[t[1]];
    const Vec3& p2 = mesh.vertices[t[2]];
    if (degenerate(p0, p1, p2)) continue;
    for (int c = 0; c < 3; ++c) {
      const Vec3& o = mesh.vertices[t[c]];
      Vec3 u = mesh.vertices[t[(c + 1) % 3]] - o;
      Vec3 v = mesh.vertices[t[(c + 2) % 3]] - o;
      k[t[c]] -= std::atan2(u.cross(v).norm(), u.dot(v));
    }
  }
  return k;
}

double gaussian_curvature_change(const Mesh& original, const Mesh& deformed) {
  require_same_topology(original, deformed);
  if (original.vertices.empty()) return 0.0;
  auto ko = angle_deficits(original);
  auto kd = angle_deficits(deformed);
  double sum = 0.0;
  for (std::size_t v = 0; v < ko.size(); ++v) sum += std::abs(kd[v] - ko[v]);
  return sum / static_cast<double>(ko.size());
}

std::vector<bool> self_intersecting_faces(const Mesh& mesh) {
  const std::size_t nf = mesh.faces.size();
  std::vector<bool> hit(nf, false);
  if (nf < 2) return hit;

  Bounds all = mesh.bounds();
  double cell = all.diagonal() / 50.0;
  if (!(cell > 0.0)) return hit;

  std::vector<Bounds> fb(nf);
  std::vector<bool> skip(nf, false);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = mesh.faces[f];
    for (int v : t) fb[f].expand(mesh.vertices[v]);
    skip[f] = degenerate(mesh.vertices[t[0]], mesh.vertices[t[1]],
                         mesh.vertices[t[2]]);
  }

  auto cell_of = [&](double x, int axis) {
    return static_cast<std::int64_t>(std::floor((x - all.min[axis]) / cell));
  };
  auto key = [](std::int64_t i, std::int64_t j, std::int64_t k) {
    return (i & 0x1FFFFF) | ((j & 0x1FFFFF) << 21) | ((k & 0x1FFFFF) << 42);
  };

  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
  for (std::size_t f = 0; f < nf; ++f) {
    if (skip[f]) continue;
    for (auto i = cell_of(fb[f].min.x(), 0); i <= cell_of(fb[f].max.x(), 0); ++i)
      for (auto j = cell_of(fb[f].min.y(), 1); j <= cell_of(fb[f].max.y(), 1); ++j)
        for (auto k = cell_of(fb[f].min.z(), 2); k <= cell_of(fb[f].max.z(), 2); ++k)
          grid[key(i, j, k)].push_back(static_cast<std::uint32_t>(f));
  }

  std::vector<std::uint32_t> cand;
  for (std::size_t f = 0; f < nf; ++f) {
    if (skip[f]) continue;
    cand.clear();
    for (auto i = cell_of(fb[f].min.x(), 0); i <= cell_of(fb[f].max.x(), 0); ++i)
      for (auto j = cell_of(fb[f].min.y(), 1); j <= cell_of(fb[f].max.y(), 1); ++j)
        for (auto k = cell_of(fb[f].min.z(), 2); k <= cell_of(fb[f].max.z(), 2); ++k)
          for (auto g : grid[key(i, j, k)])
            if (g > f) cand.push_back(g);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    const auto& a = mesh.faces[f];
    for (auto g : cand) {
      const auto& b = mesh.faces[g];
      bool shares = false;
      for (int x : a)
        for (int y : b) shares |= (x == y);
      if (shares) continue;
      if ((fb[f].max.array() < fb[g].min.array()).any() ||
          (fb[g].max.array() < fb[f].min.array()).any())
        continue;
      if (triangles_intersect(mesh.vertices[a[0]], mesh.vertices[a[1]],
                              mesh.vertices[a[2]], mesh.vertices[b[0]],
                              mesh.vertices[b[1]], mesh.vertices[b[2]])) {
        hit[f] = true;
        hit[g] = true;
      }
    }
  }
  return hit;
}

double self_intersection_ratio(const Mesh& mesh) {
  if (mesh.faces.empty()) return 0.0;
  auto hit = self_intersecting_faces(mesh);
  auto count = std::count(hit.begin(), hit.end(), true);
  return static_cast<double>(count) / static_cast<double>(mesh.faces.size());
}

double normal_consistency(const std::vector<Vec3>& original_normals,
                          const Mesh& deformed) {
  if (original_normals.size() != deformed.vertices.size())
    throw InvalidArgument("normal count " +
                          std::to_string(original_normals.size()) +
                          " does not match vertex count " +
                          std::to_string(deformed.vertices.size()));
  auto current = vertex_normals(deformed);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t v = 0; v < current.size(); ++v) {
    if (original_normals[v].isZero(0.0) || current[v].isZero(0.0)) continue;
    sum += original_normals[v] == current[v] ? 1.0
                                             : original_normals[v].dot(current[v]);
    ++used;
  }
  return used == 0 ? 1.0 : sum / static_cast<double>(used);
}

}  // namespace boxdeform
