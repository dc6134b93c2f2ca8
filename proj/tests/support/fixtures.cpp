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

#include "fixtures.hpp"

#include <cmath>
#include <map>
#include <utility>

#ifndef BOXDEFORM_TEST_DATA_DIR
#define BOXDEFORM_TEST_DATA_DIR "."
#endif

namespace fixtures {

namespace {

// Adds triangle (a,b,c), flipped if needed so its normal points away from
// `inside`.
void add_oriented(Mesh& m, int a, int b, int c, const Vec3& inside) {
  const Vec3& pa = m.vertices[a];
  Vec3 n = (m.vertices[b] - pa).cross(m.vertices[c] - pa);
  Vec3 centroid = (pa + m.vertices[b] + m.vertices[c]) / 3.0;
  if (n.dot(centroid - inside) < 0.0) std::swap(b, c);
  m.faces.push_back({a, b, c});
}

void add_quad(Mesh& m, int a, int b, int c, int d, const Vec3& inside) {
  add_oriented(m, a, b, c, inside);
  add_oriented(m, a, c, d, inside);
}

int add_vertex(Mesh& m, const Vec3& p) {
  m.vertices.push_back(p);
  return static_cast<int>(m.vertices.size()) - 1;
}

}  // namespace

void add_box(Mesh& m, const Vec3& lo, const Vec3& hi) {
  int v[8];
  for (int i = 0; i < 8; ++i)
    v[i] = add_vertex(m, {(i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                          (i & 4) ? hi.z() : lo.z()});
  const Vec3 c = 0.5 * (lo + hi);
  add_quad(m, v[0], v[2], v[6], v[4], c);  // x-
  add_quad(m, v[1], v[3], v[7], v[5], c);  // x+
  add_quad(m, v[0], v[1], v[5], v[4], c);  // y-
  add_quad(m, v[2], v[3], v[7], v[6], c);  // y+
  add_quad(m, v[0], v[1], v[3], v[2], c);  // z-
  add_quad(m, v[4], v[5], v[7], v[6], c);  // z+
}

void add_tube(Mesh& m, int axis, const std::vector<double>& stations, double u0,
              double u1, double v0, double v1) {
  const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
  const double cu = 0.5 * (u0 + u1), cv = 0.5 * (v0 + v1);
  std::vector<std::array<int, 4>> rings;
  for (double t : stations) {
    std::array<int, 4> ring;
    const double us[4] = {u0, u1, u1, u0};
    const double vs[4] = {v0, v0, v1, v1};
    for (int k = 0; k < 4; ++k) {
      Vec3 p;
      p[axis] = t;
      p[ua] = us[k];
      p[va] = vs[k];
      ring[k] = add_vertex(m, p);
    }
    rings.push_back(ring);
  }
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
    Vec3 inside;
    inside[axis] = 0.5 * (stations[r] + stations[r + 1]);
    inside[ua] = cu;
    inside[va] = cv;
    for (int k = 0; k < 4; ++k)
      add_quad(m, rings[r][k], rings[r][(k + 1) % 4], rings[r + 1][(k + 1) % 4],
               rings[r + 1][k], inside);
  }
}

Mesh cube(double side) {
  Mesh m;
  add_box(m, Vec3::Zero(), Vec3::Constant(side));
  return m;
}

Mesh dumbbell(double unit, double bar) {
  Mesh m;
  add_box(m, Vec3(0, 0, 0), Vec3(4, 4, 4));
  add_box(m, Vec3(4 + bar, 0, 0), Vec3(8 + bar, 4, 4));
  add_tube(m, 0, {4.0, 4.0 + bar}, 1.75, 2.25, 1.75, 2.25);
  for (auto& v : m.vertices) v *= unit;
  return m;
}

Mesh two_cubes(double gap) {
  Mesh m;
  // Lower cube: bottom cap, side walls, and the ring at y = 1.
  const double y0 = 0.0, y1 = 1.0, y2 = 1.0 + gap, y3 = 2.0 + gap;
  auto ring = [&](double y) {
    std::array<int, 4> r;
    r[0] = add_vertex(m, {0, y, 0});
    r[1] = add_vertex(m, {1, y, 0});
    r[2] = add_vertex(m, {1, y, 1});
    r[3] = add_vertex(m, {0, y, 1});
    return r;
  };
  auto r0 = ring(y0), r1 = ring(y1), r2 = ring(y2), r3 = ring(y3);
  auto walls = [&](const std::array<int, 4>& a, const std::array<int, 4>& b, double ymid) {
    const Vec3 inside(0.5, ymid, 0.5);
    for (int k = 0; k < 4; ++k) add_quad(m, a[k], a[(k + 1) % 4], b[(k + 1) % 4], b[k], inside);
  };
  const Vec3 centre(0.5, 0.5 * (y0 + y3), 0.5);
  add_quad(m, r0[0], r0[1], r0[2], r0[3], centre);
  walls(r0, r1, 0.5 * (y0 + y1));
  walls(r1, r2, 0.5 * (y1 + y2));
  walls(r2, r3, 0.5 * (y2 + y3));
  add_quad(m, r3[0], r3[1], r3[2], r3[3], centre);
  return m;
}

Mesh airplane_cross() {
  Mesh m;
  add_box(m, Vec3(0, -1, -0.5), Vec3(10, 1, 0.5));
  add_tube(m, 1, {1, 2, 3, 4, 5, 6}, -0.25, 0.25, 4.0, 6.0);
  add_tube(m, 1, {-6, -5, -4, -3, -2, -1}, -0.25, 0.25, 4.0, 6.0);
  return m;
}

Mesh table() {
  Mesh m;
  add_box(m, Vec3(0, 2, 0), Vec3(4, 2.3, 2));
  const double xs[2] = {0.2, 3.6}, zs[2] = {0.2, 1.6};
  for (double x : xs)
    for (double z : zs) add_tube(m, 1, {0.0, 0.5, 1.0, 1.5, 2.0}, z, z + 0.2, x, x + 0.2);
  return m;
}

Mesh icosphere(int level) {
  Mesh m;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& r : raw) m.vertices.push_back(Vec3(r[0], r[1], r[2]).normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      int id = add_vertex(m, (m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, id);
      return id;
    };
    std::vector<boxdeform::Face> next;
    for (const auto& f : m.faces) {
      int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  Mesh out = m;
  out.faces.clear();
  for (const auto& f : m.faces) add_oriented(out, f[0], f[1], f[2], Vec3::Zero());
  return out;
}

Mesh flat_square() {
  Mesh m;
  m.vertices = {{0, 0, 0.5}, {1, 0, 0.5}, {1, 1, 0.5}, {0, 1, 0.5}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

Mesh lifted_square(double lift) {
  Mesh m;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) m.vertices.emplace_back(i, j, (i == 1 && j == 1) ? lift : 0.0);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      int a = j * 3 + i, b = a + 1, c = a + 4, d = a + 3;
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  return m;
}

Mesh crossing_pair() {
  Mesh m;
  m.vertices = {{0, 0, 0},     {2, 0, 0},     {0, 2, 0},        // A, in z = 0
                {0.5, 0.25, -1}, {0.5, 0.25, 1}, {0.5, 1.5, 0},  // B, pierces A
                {10, 0, 0},    {11, 0, 0},    {10, 1, 0},       // C
                {10, 0, 5},    {11, 0, 5},    {10, 1, 5}};      // D
  m.faces = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
  return m;
}

std::vector<Named> identity_set() {
  return {{"cube", cube()},
          {"dumbbell", dumbbell()},
          {"airplane-cross", airplane_cross()},
          {"table", table()},
          {"icosphere", icosphere(2)}};
}

Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& linear, const Vec3& offset) {
  Mesh out = mesh;
  for (auto& v : out.vertices) v = linear * v + offset;
  return out;
}

std::filesystem::path data_dir() { return BOXDEFORM_TEST_DATA_DIR; }

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("boxdeform_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
