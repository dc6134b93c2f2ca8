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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "boxdeform/geometry.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kOrange{255, 165, 0};

struct Camera {
  double azimuth_deg = 45.0;
  double elevation_deg = 20.0;
  double distance = 2.2;  // in framing diagonals
  double fov_deg = 40.0;
  int width = 224;
  int height = 224;
};

// What the camera looks at. Fixed from the source mesh for a whole
// optimization run so that deformation changes what the views see.
struct Framing {
  Vec3 center = Vec3::Zero();
  double diagonal = 1.0;

  static Framing of(const Mesh& mesh) {
    Bounds b = mesh.bounds();
    return {b.center(), b.diagonal() > 0.0 ? b.diagonal() : 1.0};
  }
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, Rgb fill);
  Rgb at(int x, int y) const {
    auto i = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void put(int x, int y, Rgb c) {
    auto i = 3 * (static_cast<std::size_t>(y) * width + x);
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }
  bool operator==(const Image&) const = default;
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  int area() const;
  bool operator==(const Mask&) const = default;
};

struct RenderOptions {
  double albedo = 0.7;
  double ambient = 0.25;
};

struct RenderStats {
  int covered_pixels = 0;
  int drawn_triangles = 0;
};

// Cameras at azimuth 45 + k * 360 / n degrees, fixed elevation.
std::vector<Camera> view_set(int n_azimuths, double elevation_deg = 20.0,
                             int image_size = 224);

// Z-buffered flat-shaded rasterization, no anti-aliasing. Triangles with a
// vertex behind the near plane are dropped.
Image render(const Mesh& mesh, const Camera& camera, const Framing& framing,
             Rgb background, const RenderOptions& options = {},
             RenderStats* stats = nullptr);

inline Image render(const Mesh& mesh, const Camera& camera, Rgb background) {
  return render(mesh, camera, Framing::of(mesh), background);
}

// Pixels differing from `background`.
Mask silhouette(const Image& image, Rgb background);

double mask_iou(const Mask& a, const Mask& b);

std::string encode_png(const Image& image);
// Reads 8-bit RGB non-interlaced PNGs (all five filter types).
Image decode_png(const std::string& bytes);
void write_png(const Image& image, const std::filesystem::path& path);

// Portable bitmap (P1 ascii or P4 binary); 1 = foreground.
Mask read_pbm(const std::filesystem::path& path);
void write_pbm(const Mask& mask, const std::filesystem::path& path);

}  // namespace boxdeform
