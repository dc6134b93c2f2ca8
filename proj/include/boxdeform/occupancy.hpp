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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "boxdeform/geometry.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

using CellIndex = std::array<int, 3>;

// Inclusive range of cell indices per axis.
struct CellRange {
  CellIndex lo{0, 0, 0};
  CellIndex hi{-1, -1, -1};
  int span(int axis) const { return hi[axis] - lo[axis] + 1; }
};

// Binary surface occupancy on a cubic-cell grid. Cell (i,j,k) covers
// [origin + (i,j,k) * cell_size, origin + (i+1,j+1,k+1) * cell_size].
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(CellIndex dims, Vec3 origin, double cell_size);

  const CellIndex& dims() const { return dims_; }
  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int i, int j, int k) const { return bits_[linear(i, j, k)] != 0; }
  void set(int i, int j, int k, bool on = true) {
    bits_[linear(i, j, k)] = on ? 1 : 0;
  }
  std::size_t count() const;

  Bounds cell_bounds(int i, int j, int k) const;

  // World coordinate of the lower boundary of cell `c` along `axis`.
  double boundary(int axis, int c) const {
    return origin_[axis] + c * cell_size_;
  }

  // Cells covering `box`: boundaries that coincide with the box faces
  // belong to the outside neighbour. Clamped to the grid.
  CellRange cells_of(const Bounds& box) const;

  // Run-length encoded text dump: dims, origin, cell_size, then runs of
  // alternating 0/1 counts starting with 0 in x-fastest order.
  std::string to_rle() const;
  static OccupancyGrid from_rle(const std::string& text);

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }

  CellIndex dims_{0, 0, 0};
  Vec3 origin_ = Vec3::Zero();
  double cell_size_ = 1.0;
  std::vector<std::uint8_t> bits_;
};

// Grid layout for a mesh: cubic cells sized so the longest AABB axis spans
// `resolution` cells, one padding layer on every side, centred on the AABB.
OccupancyGrid make_grid(const Bounds& bounds, int resolution);

inline constexpr int kDefaultResolution = 64;

// Surface voxelization; a cell is set iff some triangle overlaps its closed
// box. Throws InvalidArgument on a zero-extent mesh or out-of-range
// resolution (valid range [8, 512]).
OccupancyGrid voxelize(const Mesh& mesh, int resolution = kDefaultResolution);

// Separating-axis test between a triangle and a closed axis-aligned box.
bool triangle_box_overlap(const Vec3& center, const Vec3& half_size,
                          const Vec3& a, const Vec3& b, const Vec3& c);

struct ProjectionGrid {
  Axis axis = Axis::kX;
  int slab_start = 0;
  int slab_width = 0;
  int width = 0;   // cells along the first transverse axis
  int height = 0;  // cells along the second transverse axis
  std::vector<std::uint8_t> bitmap;
  int area = 0;
};

// OR-projection of the occupied cells of `range` in slab
// [slab_start, slab_start + slab_width) along `axis`. Throws
// InvalidArgument when the slab leaves the range.
ProjectionGrid projection_grid(const OccupancyGrid& grid,
                               const CellRange& range, Axis axis,
                               int slab_start, int slab_width);

}  // namespace boxdeform
