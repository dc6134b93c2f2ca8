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

#include "boxdeform/box_split.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "boxdeform/error.hpp"

namespace boxdeform {

PartBox PartBox::tight(const Mesh& mesh, std::vector<int> owned) {
  PartBox box;
  box.vertices = std::move(owned);
  for (int v : box.vertices) box.bounds.expand(mesh.vertices[v]);
  return box;
}

std::vector<CutCandidate> split_scores(const OccupancyGrid& grid,
                                       const PartBox& box, Axis axis,
                                       const SplitOptions& options) {
  std::vector<CutCandidate> out;
  if (box.vertices.empty()) return out;
  const int a = index(axis);
  const CellRange range = grid.cells_of(box.bounds);
  if (range.span(a) < 3) return out;
  const double length = box.length(a);
  if (!(length > 0.0)) return out;
  const int delta = std::max(1, options.slab_width);

  for (int c = range.lo[a] + 1; c <= range.hi[a]; ++c) {
    int below_start = std::max(range.lo[a], c - delta);
    int above_end = std::min(range.hi[a] + 1, c + delta);
    int below = projection_grid(grid, range, axis, below_start, c - below_start).area;
    int above = projection_grid(grid, range, axis, c, above_end - c).area;
    if (below == 0 && above == 0) continue;
    CutCandidate cand;
    cand.axis = axis;
    cand.boundary = c;
    cand.position = grid.boundary(a, c);
    cand.area_below = below;
    cand.area_above = above;
    if (below == 0 || above == 0) {
      cand.score = 0.0;
    } else {
      cand.score = static_cast<double>(std::min(below, above)) /
                   static_cast<double>(std::max(below, above)) / length;
    }
    out.push_back(cand);
  }
  return out;
}

namespace {

bool ranks_before(const CutCandidate& a, double length_a,
                  const CutCandidate& b, double length_b) {
  if (a.score != b.score) return a.score < b.score;
  if (length_a != length_b) return length_a > length_b;
  if (a.position != b.position) return a.position < b.position;
  return index(a.axis) < index(b.axis);
}

}  // namespace

bool cut_precedes(const CutCandidate& a, const CutCandidate& b,
                  const PartBox& box) {
  return ranks_before(a, box.length(index(a.axis)), b,
                      box.length(index(b.axis)));
}

std::optional<CutCandidate> best_cut(const Mesh& mesh,
                                     const OccupancyGrid& grid,
                                     const PartBox& box,
                                     const SplitOptions& options) {
  std::optional<CutCandidate> best;
  const auto n = static_cast<std::ptrdiff_t>(box.vertices.size());
  if (n < 2 * options.min_vertices) return best;
  std::vector<double> coords(box.vertices.size());
  for (int a = 0; a < 3; ++a) {
    auto candidates = split_scores(grid, box, static_cast<Axis>(a), options);
    if (candidates.empty()) continue;
    for (std::size_t i = 0; i < coords.size(); ++i)
      coords[i] = mesh.vertices[box.vertices[i]][a];
    std::sort(coords.begin(), coords.end());
    for (const auto& cand : candidates) {
      auto low = std::upper_bound(coords.begin(), coords.end(), cand.position) -
                 coords.begin();
      if (low < options.min_vertices || n - low < options.min_vertices) continue;
      if (!best || cut_precedes(cand, *best, box)) best = cand;
    }
  }
  return best;
}

std::pair<PartBox, PartBox> split_box(const Mesh& mesh, const PartBox& box,
                                      const CutCandidate& cut) {
  const int a = index(cut.axis);
  std::vector<int> low, high;
  for (int v : box.vertices)
    (mesh.vertices[v][a] <= cut.position ? low : high).push_back(v);
  return {PartBox::tight(mesh, std::move(low)),
          PartBox::tight(mesh, std::move(high))};
}

std::vector<PartBox> generate_boxes(const Mesh& mesh,
                                    const OccupancyGrid& grid,
                                    int target_count,
                                    const SplitOptions& options) {
  if (target_count < 1 || target_count > 16)
    throw InvalidArgument("box count must be in [1, 16], got " +
                          std::to_string(target_count));
  std::vector<int> all(mesh.vertices.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<PartBox> boxes{PartBox::tight(mesh, std::move(all))};
  std::vector<std::optional<CutCandidate>> cuts{
      target_count > 1 ? best_cut(mesh, grid, boxes[0], options) : std::nullopt};

  while (static_cast<int>(boxes.size()) < target_count) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (!cuts[i]) continue;
      if (!pick) {
        pick = i;
        continue;
      }
      const auto& ci = *cuts[i];
      const auto& cp = *cuts[*pick];
      if (ranks_before(ci, boxes[i].length(index(ci.axis)), cp,
                       boxes[*pick].length(index(cp.axis))))
        pick = i;
    }
    if (!pick) break;

    auto [low, high] = split_box(mesh, boxes[*pick], *cuts[*pick]);
    boxes[*pick] = std::move(low);
    boxes.push_back(std::move(high));
    cuts[*pick] = best_cut(mesh, grid, boxes[*pick], options);
    cuts.push_back(best_cut(mesh, grid, boxes.back(), options));
  }
  return boxes;
}

std::string boxes_to_json(const std::vector<PartBox>& boxes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : boxes) {
    out.push_back({{"min", {b.bounds.min.x(), b.bounds.min.y(), b.bounds.min.z()}},
                   {"max", {b.bounds.max.x(), b.bounds.max.y(), b.bounds.max.z()}},
                   {"vertex_count", b.vertices.size()}});
  }
  return out.dump(2);
}

}  // namespace boxdeform
