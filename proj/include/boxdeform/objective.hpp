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

// Loss = -mean(image/text similarity) + w * (1 - normal consistency).
//
// Similarities come from a Scorer. Remote scorers speak a small JSON
// protocol, either over HTTP:
//
//   POST /score  {"prompt": "...", "images": ["<base64 PNG>", ...]}
//   200          {"similarities": [0.31, ...]}
//
// or as one JSON object per line over a child process's stdin/stdout.
// Two proxy scorers stand in for an image/text model in tests and offline
// runs.

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "boxdeform/def_graph.hpp"
#include "boxdeform/mesh.hpp"
#include "boxdeform/renderer.hpp"

namespace boxdeform {

struct RenderedView {
  Image image;  // empty when the scorer declared it does not need pixels
  Rgb background;
  int view_index = 0;
};

struct ScoreRequest {
  std::string prompt;
  std::vector<RenderedView> views;
  Bounds deformed_bounds;  // metadata for geometric proxies
};

struct ScoreResponse {
  std::vector<double> similarities;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreResponse score(const ScoreRequest& request) = 0;
  virtual std::string name() const = 0;
  virtual bool needs_images() const { return true; }
  // False makes the objective serialize calls.
  virtual bool concurrent() const { return true; }
};

// exp(-|log(r) - log(t)|^2) with r = deformed AABB extents and t the
// target, both divided by their x component. Ignores prompt and pixels.
std::unique_ptr<Scorer> proxy_aspect_scorer(const Vec3& target_ratios);

// IoU of each image's silhouette with the target mask of its view.
std::unique_ptr<Scorer> proxy_silhouette_scorer(std::vector<Mask> targets);

// `endpoint` like "http://127.0.0.1:8765" (a path prefix is allowed);
// requests go to <endpoint>/score.
std::unique_ptr<Scorer> http_scorer(
    const std::string& endpoint,
    std::chrono::milliseconds timeout = std::chrono::seconds(120));

// Runs `command` through /bin/sh once and exchanges one JSON line per
// request.
std::unique_ptr<Scorer> process_scorer(const std::string& command);

std::string request_to_wire(const ScoreRequest& request);
ScoreResponse response_from_wire(const std::string& body,
                                 std::size_t expected_count);

double clip_loss(std::span<const double> similarities);
double normal_loss(const std::vector<Vec3>& original_normals,
                   const Mesh& deformed, double weight);

struct LossBreakdown {
  double total = 0.0;
  double clip_term = 0.0;
  double normal_term = 0.0;
  std::vector<double> similarities;
  bool operator==(const LossBreakdown&) const = default;
};

struct ObjectiveConfig {
  std::vector<Camera> views = view_set(4, 20.0, 224);
  std::vector<Rgb> backgrounds{kWhite, kBlack, kOrange};
  double normal_weight = 1.0;
  int retries = 2;
  RenderOptions render;
};

// Binds a rest mesh and its graph to a scorer. evaluate() is safe to call
// from several threads at once.
class Objective {
 public:
  Objective(const Mesh& mesh, const BoxDefGraph& graph, Scorer& scorer,
            std::string prompt, ObjectiveConfig config = {});

  LossBreakdown evaluate(const DeformParams& params) const;
  LossBreakdown evaluate_mesh(const Mesh& deformed) const;

  // Views ordered view-major, backgrounds inner.
  ScoreRequest make_request(const Mesh& deformed) const;
  ScoreResponse score(const ScoreRequest& request) const;

  const Framing& framing() const { return framing_; }
  const ObjectiveConfig& config() const { return config_; }

 private:
  const Mesh& mesh_;
  const BoxDefGraph& graph_;
  Scorer& scorer_;
  std::string prompt_;
  ObjectiveConfig config_;
  Framing framing_;
  std::vector<Vec3> rest_normals_;
  mutable std::mutex serial_;
};

LossBreakdown evaluate(const Mesh& mesh, const BoxDefGraph& graph,
                       const DeformParams& params, Scorer& scorer,
                       const std::string& prompt,
                       const ObjectiveConfig& config = {});

// Silhouettes of `mesh` for every view, framed by `framing`.
std::vector<Mask> silhouettes(const Mesh& mesh, const std::vector<Camera>& views,
                              const Framing& framing);

}  // namespace boxdeform
