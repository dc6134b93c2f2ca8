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

#include "boxdeform/occupancy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "boxdeform/error.hpp"

namespace boxdeform {

OccupancyGrid::OccupancyGrid(CellIndex dims, Vec3 origin, double cell_size)
    : dims_(dims), origin_(std::move(origin)), cell_size_(cell_size) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || !(cell_size > 0.0))
    throw InvalidArgument("occupancy grid needs positive dims and cell size");
  bits_.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
}

std::size_t OccupancyGrid::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Bounds OccupancyGrid::cell_bounds(int i, int j, int k) const {
  Bounds b;
  b.min = origin_ + cell_size_ * Vec3(i, j, k);
  b.max = origin_ + cell_size_ * Vec3(i + 1, j + 1, k + 1);
  return b;
}

CellRange OccupancyGrid::cells_of(const Bounds& box) const {
  CellRange r;
  for (int a = 0; a < 3; ++a) {
    int lo = static_cast<int>(std::floor((box.min[a] - origin_[a]) / cell_size_));
    int hi = static_cast<int>(std::ceil((box.max[a] - origin_[a]) / cell_size_)) - 1;
    hi = std::max(hi, lo);
    r.lo[a] = std::clamp(lo, 0, dims_[a] - 1);
    r.hi[a] = std::clamp(hi, 0, dims_[a] - 1);
  }
  return r;
}

std::string OccupancyGrid::to_rle() const {
  std::ostringstream out;
  out.precision(17);
  out << "dims " << dims_[0] << ' ' << dims_[1] << ' ' << dims_[2] << '\n';
  out << "origin " << origin_.x() << ' ' << origin_.y() << ' ' << origin_.z()
      << '\n';
  out << "cell_size " << cell_size_ << '\n';
  out << "runs";
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (auto b : bits_) {
    if (b != current) {
      out << ' ' << run;
      current = b;
      run = 0;
    }
    ++run;
  }
  out << ' ' << run << '\n';
  return out.str();
}

OccupancyGrid OccupancyGrid::from_rle(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  CellIndex dims{};
  Vec3 origin;
  double cell = 0.0;
  in >> tag >> dims[0] >> dims[1] >> dims[2];
  if (tag != "dims") throw ParseError(1, "expected 'dims'");
  in >> tag >> origin.x() >> origin.y() >> origin.z();
  if (tag != "origin") throw ParseError(2, "expected 'origin'");
  in >> tag >> cell;
  if (tag != "cell_size") throw ParseError(3, "expected 'cell_size'");
  in >> tag;
  if (tag != "runs") throw ParseError(4, "expected 'runs'");
  OccupancyGrid grid(dims, origin, cell);
  std::size_t pos = 0;
  std::uint8_t current = 0;
  std::size_t run = 0;
  while (in >> run) {
    if (pos + run > grid.bits_.size()) throw ParseError(4, "runs overflow grid");
    std::fill_n(grid.bits_.begin() + static_cast<std::ptrdiff_t>(pos), run,
                current);
    pos += run;
    current ^= 1;
  }
  if (pos != grid.bits_.size()) throw ParseError(4, "runs do not cover grid");
  return grid;
}

OccupancyGrid make_grid(const Bounds& bounds, int resolution) {
  if (resolution < 1 || resolution > 512)
    throw InvalidArgument("voxel resolution must be in [1, 512], got " +
                          std::to_string(resolution));
  Vec3 ext = bounds.extent();
  double longest = bounds.empty() ? 0.0 : ext.maxCoeff();
  if (!(longest > 0.0)) throw InvalidArgument("mesh has zero extent");
  double cell = longest / resolution;
  CellIndex dims{};
  Vec3 origin;
  for (int a = 0; a < 3; ++a) {
    // floor + 3 keeps at least one padding layer and puts faces of
    // cell-aligned extents on cell centres rather than cell boundaries.
    int inner = static_cast<int>(std::floor(ext[a] / cell + 1e-9));
    dims[a] = inner + 3;
    origin[a] = bounds.center()[a] - 0.5 * dims[a] * cell;
  }
  return OccupancyGrid(dims, origin, cell);
}

bool triangle_box_overlap(const Vec3& center, const Vec3& half_size,
                          const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = a - center, v1 = b - center, v2 = c - center;
  const Vec3 e[3] = {v1 - v0, v2 - v1, v0 - v2};

  // Box face normals.
  for (int i = 0; i < 3; ++i) {
    double lo = std::min({v0[i], v1[i], v2[i]});
    double hi = std::max({v0[i], v1[i], v2[i]});
    if (lo > half_size[i] || hi < -half_size[i]) return false;
  }

  // Triangle plane.
  Vec3 n = e[0].cross(e[1]);
  double d = n.dot(v0);
  double r = half_size.dot(n.cwiseAbs());
  if (d > r || d < -r) return false;

  // Edge cross products.
  for (const auto& edge : e) {
    for (int i = 0; i < 3; ++i) {
      Vec3 axis = Vec3::Unit(i).cross(edge);
      double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
      double rad = half_size.dot(axis.cwiseAbs());
      if (std::min({p0, p1, p2}) > rad || std::max({p0, p1, p2}) < -rad)
        return false;
    }
  }
  return true;
}

OccupancyGrid voxelize(const Mesh& mesh, int resolution) {
  OccupancyGrid grid = make_grid(mesh.bounds(), resolution);
  const double cell = grid.cell_size();
  const Vec3 half = Vec3::Constant(0.5 * cell);
  const auto& dims = grid.dims();
  for (const auto& t : mesh.faces) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    CellIndex lo{}, hi{};
    for (int ax = 0; ax < 3; ++ax) {
      double mn = std::min({a[ax], b[ax], c[ax]});
      double mx = std::max({a[ax], b[ax], c[ax]});
      lo[ax] = std::clamp(
          static_cast<int>(std::floor((mn - grid.origin()[ax]) / cell)) - 1, 0,
          dims[ax] - 1);
      hi[ax] = std::clamp(
          static_cast<int>(std::floor((mx - grid.origin()[ax]) / cell)) + 1, 0,
          dims[ax] - 1);
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int i = lo[0]; i <= hi[0]; ++i) {
          if (grid.at(i, j, k)) continue;
          Vec3 center = grid.origin() + cell * Vec3(i + 0.5, j + 0.5, k + 0.5);
          if (triangle_box_overlap(center, half, a, b, c)) grid.set(i, j, k);
        }
  }
  return grid;
}

ProjectionGrid projection_grid(const OccupancyGrid& grid,
                               const CellRange& range, Axis axis,
                               int slab_start, int slab_width) {
  const int a = index(axis);
  const int u = (a + 1) % 3, v = (a + 2) % 3;
  if (slab_width < 1 || slab_start < range.lo[a] ||
      slab_start + slab_width - 1 > range.hi[a])
    throw InvalidArgument("slab [" + std::to_string(slab_start) + ", " +
                          std::to_string(slab_start + slab_width) +
                          ") outside box cell range");
  ProjectionGrid p;
  p.axis = axis;
  p.slab_start = slab_start;
  p.slab_width = slab_width;
  p.width = range.span(u);
  p.height = range.span(v);
  p.bitmap.assign(static_cast<std::size_t>(p.width) * p.height, 0);
  CellIndex idx{};
  for (int s = slab_start; s < slab_start + slab_width; ++s) {
    idx[a] = s;
    for (int y = 0; y < p.height; ++y) {
      idx[v] = range.lo[v] + y;
      for (int x = 0; x < p.width; ++x) {
        idx[u] = range.lo[u] + x;
        auto& bit = p.bitmap[static_cast<std::size_t>(y) * p.width + x];
        if (!bit && grid.at(idx[0], idx[1], idx[2])) {
          bit = 1;
          ++p.area;
        }
      }
    }
  }
  return p;
}

}  // namespace boxdeform
