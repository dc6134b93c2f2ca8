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

#include <optional>
#include <vector>

#include "boxdeform/geometry.hpp"
#include "boxdeform/mesh.hpp"
#include "boxdeform/occupancy.hpp"

namespace boxdeform {

// Part-level box: tight bounds of the vertices it owns.
struct PartBox {
  Bounds bounds;
  std::vector<int> vertices;

  double length(int axis) const { return bounds.max[axis] - bounds.min[axis]; }

  static PartBox tight(const Mesh& mesh, std::vector<int> owned);
};

struct CutCandidate {
  Axis axis = Axis::kX;
  int boundary = 0;        // cell boundary index on the global grid
  double position = 0.0;   // world coordinate of that boundary
  double score = 0.0;      // area ratio times reciprocal axis length
  int area_below = 0;
  int area_above = 0;
};

struct SplitOptions {
  int slab_width = 1;
  int min_vertices = 8;
};

// One candidate per interior cell boundary of the box along `axis` whose
// adjacent slabs are not both empty. Empty when the box spans < 3 cells.
std::vector<CutCandidate> split_scores(const OccupancyGrid& grid,
                                       const PartBox& box, Axis axis,
                                       const SplitOptions& options = {});

// Strict total order used for every tie: lower score, then longer box
// axis, then lower position, then axis x < y < z.
bool cut_precedes(const CutCandidate& a, const CutCandidate& b,
                  const PartBox& box);

// Best admissible cut over all axes; a cut is admissible when both sides
// own at least `min_vertices` vertices.
std::optional<CutCandidate> best_cut(const Mesh& mesh,
                                     const OccupancyGrid& grid,
                                     const PartBox& box,
                                     const SplitOptions& options = {});

// Vertices at or below the cut go to the first child.
std::pair<PartBox, PartBox> split_box(const Mesh& mesh, const PartBox& box,
                                      const CutCandidate& cut);

// Greedy priority splitting from the global AABB until `target_count`
// boxes exist or nothing is splittable. A split replaces the parent with
// its low child in place and appends the high child.
std::vector<PartBox> generate_boxes(const Mesh& mesh,
                                    const OccupancyGrid& grid,
                                    int target_count,
                                    const SplitOptions& options = {});

// Debug export: [{"min":[..],"max":[..],"vertex_count":n}, ...]
std::string boxes_to_json(const std::vector<PartBox>& boxes);

}  // namespace boxdeform
