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

// Procedural test meshes. All are consistently oriented with outward
// normals unless stated otherwise.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "boxdeform/mesh.hpp"

namespace fixtures {

using boxdeform::Mesh;
using boxdeform::Vec3;

// Closed box, 8 vertices and 12 triangles.
void add_box(Mesh& mesh, const Vec3& lo, const Vec3& hi);

// Open tube with a rectangular cross-section [u0,u1] x [v0,v1] along
// `axis`, one ring of 4 vertices at each entry of `stations`.
void add_tube(Mesh& mesh, int axis, const std::vector<double>& stations,
              double u0, double u1, double v0, double v1);

Mesh cube(double side = 1.0);

// Two 4x4x4 blocks along x joined by a thin open bar two units long that
// sits inside one voxel column at resolution 10 (cell = 1 unit):
//   blocks x in [0,4] and [6,10], y,z in [0,4]
//   bar    x in [4,6], y,z in [1.75,2.25]
// Scaled by `unit` (0.25 gives unit cubes). `bar` sets the bar length.
Mesh dumbbell(double unit = 1.0, double bar = 2.0);
inline constexpr int kDumbbellResolution = 10;
inline constexpr double kDumbbellBarMidX = 5.0;  // before scaling

// Two unit cubes stacked along y with a small gap, joined by an open
// sleeve across the gap. 16 vertices; each cube owns 8.
Mesh two_cubes(double gap = 0.05);

// Long body along x with two wings along +-y. Wing roots lie on the body
// faces; wings carry intermediate vertex rings.
Mesh airplane_cross();

// Table top and four legs along y whose top rings lie on the top's
// underside.
Mesh table();

Mesh icosphere(int level = 2);

// Unit square [0,1]^2 at z = 0.5 (two triangles).
Mesh flat_square();

// 3x3 vertex grid on [0,2]^2 with the centre vertex raised by `lift`.
Mesh lifted_square(double lift);

// Two triangles piercing each other plus two far-away triangles.
Mesh crossing_pair();

// The five meshes used for identity checks.
struct Named {
  std::string name;
  Mesh mesh;
};
std::vector<Named> identity_set();

Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& linear,
                 const Vec3& offset);

std::filesystem::path data_dir();
std::filesystem::path temp_dir(const std::string& name);

}  // namespace fixtures
