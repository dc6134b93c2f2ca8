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

#include "boxdeform/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boxdeform/error.hpp"

namespace boxdeform {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct ViewBasis {
  Vec3 eye, right, up, forward;
};

ViewBasis look_at(const Camera& cam, const Framing& framing) {
  const double az = radians(cam.azimuth_deg);
  const double el = radians(cam.elevation_deg);
  const Vec3 dir(std::cos(el) * std::sin(az), std::sin(el),
                 std::cos(el) * std::cos(az));
  ViewBasis v;
  v.eye = framing.center + cam.distance * framing.diagonal * dir;
  v.forward = -dir;
  Vec3 world_up = Vec3::UnitY();
  if (std::abs(v.forward.dot(world_up)) > 1.0 - 1e-12) world_up = Vec3::UnitZ();
  v.right = v.forward.cross(world_up).normalized();
  v.up = v.right.cross(v.forward);
  return v;
}

// Top-left fill rule for edge a->b of a counter-clockwise (in pixel space,
// y down) triangle.
bool top_left(double ax, double ay, double bx, double by) {
  double dx = bx - ax, dy = by - ay;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

}  // namespace

Image::Image(int w, int h, Rgb fill)
    : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

int Mask::area() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), 1));
}

std::vector<Camera> view_set(int n_azimuths, double elevation_deg,
                             int image_size) {
  if (n_azimuths < 1) throw InvalidArgument("view count must be >= 1");
  if (image_size < 32) throw InvalidArgument("image size must be >= 32");
  std::vector<Camera> views;
  for (int k = 0; k < n_azimuths; ++k) {
    Camera c;
    c.azimuth_deg = 45.0 + k * 360.0 / n_azimuths;
    c.elevation_deg = elevation_deg;
    c.width = image_size;
    c.height = image_size;
    views.push_back(c);
  }
  return views;
}

Image render(const Mesh& mesh, const Camera& camera, const Framing& framing,
             Rgb background, const RenderOptions& options,
             RenderStats* stats) {
  if (camera.width < 32 || camera.height < 32)
    throw InvalidArgument("image size must be >= 32");
  if (!(camera.distance > 0.0)) throw InvalidArgument("camera distance must be > 0");

  Image img(camera.width, camera.height, background);
  const int w = camera.width, h = camera.height;
  const ViewBasis view = look_at(camera, framing);
  const double focal = 0.5 * h / std::tan(0.5 * radians(camera.fov_deg));
  const double near = 1e-3 * framing.diagonal;

  struct Projected {
    double x, y, inv_z;
    bool ok;
  };
  std::vector<Projected> proj(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    Vec3 d = mesh.vertices[i] - view.eye;
    double z = d.dot(view.forward);
    if (z <= near) {
      proj[i] = {0, 0, 0, false};
      continue;
    }
    proj[i] = {0.5 * w + focal * d.dot(view.right) / z,
               0.5 * h - focal * d.dot(view.up) / z, 1.0 / z, true};
  }

  std::vector<double> depth(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(w) * h, 0);
  int drawn = 0;

  for (const auto& f : mesh.faces) {
    Projected p0 = proj[f[0]], p1 = proj[f[1]], p2 = proj[f[2]];
    if (!p0.ok || !p1.ok || !p2.ok) continue;
    double area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    if (area == 0.0) continue;
    if (area < 0.0) {
      std::swap(p1, p2);
      area = -area;
    }

    Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                 .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    double len = n.norm();
    double diffuse = len > 0.0 ? std::abs(n.dot(view.forward)) / len : 0.0;
    double intensity = options.albedo * (options.ambient + diffuse);
    auto level = static_cast<std::uint8_t>(
        std::clamp(std::lround(255.0 * intensity), 0L, 255L));
    const Rgb shade{level, level, level};

    int x0 = std::max(0, static_cast<int>(std::floor(std::min({p0.x, p1.x, p2.x}))));
    int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({p0.x, p1.x, p2.x}))));
    int y0 = std::max(0, static_cast<int>(std::floor(std::min({p0.y, p1.y, p2.y}))));
    int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({p0.y, p1.y, p2.y}))));
    if (x0 > x1 || y0 > y1) continue;
    ++drawn;

    // With y pointing down, positive `area` means clockwise on screen; the
    // edge functions below are all >= 0 inside.
    const bool tl0 = top_left(p1.x, p1.y, p2.x, p2.y);
    const bool tl1 = top_left(p2.x, p2.y, p0.x, p0.y);
    const bool tl2 = top_left(p0.x, p0.y, p1.x, p1.y);
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        double e0 = (p2.x - p1.x) * (py - p1.y) - (p2.y - p1.y) * (px - p1.x);
        double e1 = (p0.x - p2.x) * (py - p2.y) - (p0.y - p2.y) * (px - p2.x);
        double e2 = (p1.x - p0.x) * (py - p0.y) - (p1.y - p0.y) * (px - p0.x);
        if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
        if ((e0 == 0.0 && !tl0) || (e1 == 0.0 && !tl1) || (e2 == 0.0 && !tl2))
          continue;
        double inv_z = (e0 * p0.inv_z + e1 * p1.inv_z + e2 * p2.inv_z) / area;
        auto idx = static_cast<std::size_t>(y) * w + x;
        if (inv_z <= depth[idx]) continue;
        depth[idx] = inv_z;
        covered[idx] = 1;
        img.put(x, y, shade);
      }
    }
  }

  if (stats) {
    stats->covered_pixels =
        static_cast<int>(std::count(covered.begin(), covered.end(), 1));
    stats->drawn_triangles = drawn;
  }
  return img;
}

Mask silhouette(const Image& image, Rgb background) {
  Mask m;
  m.width = image.width;
  m.height = image.height;
  m.bits.resize(static_cast<std::size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      m.bits[static_cast<std::size_t>(y) * image.width + x] =
          image.at(x, y) == background ? 0 : 1;
  return m;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width != b.width || a.height != b.height)
    throw InvalidArgument("mask sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += (a.bits[i] & b.bits[i]);
    uni += (a.bits[i] | b.bits[i]);
  }
  // Two empty masks agree perfectly.
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace boxdeform
