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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "boxdeform/geometry.hpp"

namespace boxdeform {

using Face = std::array<int, 3>;

// Indexed triangle mesh. Per-vertex attributes are opaque payloads that
// deformation copies through untouched.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::map<std::string, std::vector<double>> attributes;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  Bounds bounds() const { return Bounds::of(vertices); }

  // Throws TopologyError when an index is out of range, a face repeats an
  // index, or the mesh has fewer than 3 vertices or no faces.
  void validate() const;
};

// Faces with area below this are skipped by normals and curvature.
inline constexpr double kDegenerateArea = 1e-12;

Mesh load_obj(const std::filesystem::path& path);
Mesh parse_obj(const std::string& text);
void save_obj(const Mesh& mesh, const std::filesystem::path& path);
std::string format_obj(const Mesh& mesh);

// Unit normal per vertex: normalized unweighted sum of incident unit face
// normals. Vertices without a non-degenerate incident face get zero.
std::vector<Vec3> vertex_normals(const Mesh& mesh);

std::vector<Vec3> face_normals(const Mesh& mesh);

// Angle deficit 2*pi - sum of incident corner angles, per vertex.
std::vector<double> angle_deficits(const Mesh& mesh);

// Mean over vertices of |K_deformed - K_original|.
double gaussian_curvature_change(const Mesh& original, const Mesh& deformed);

// Fraction of faces intersecting some face they share no vertex with.
double self_intersection_ratio(const Mesh& mesh);

// Per-face flag behind self_intersection_ratio.
std::vector<bool> self_intersecting_faces(const Mesh& mesh);

// Exact-predicate triangle/triangle overlap (touching and coplanar overlap
// count as intersecting).
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2);

// Mean cosine between original normals and normals recomputed on
// `deformed`; vertices with a zero normal on either side are skipped.
double normal_consistency(const std::vector<Vec3>& original_normals,
                          const Mesh& deformed);

void require_same_topology(const Mesh& a, const Mesh& b);

}  // namespace boxdeform
