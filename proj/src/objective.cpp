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

#include "boxdeform/objective.hpp"

#include <cmath>
#include <numeric>

#include "boxdeform/error.hpp"

namespace boxdeform {

namespace {

class AspectScorer final : public Scorer {
 public:
  explicit AspectScorer(const Vec3& target) {
    if ((target.array() <= 0.0).any() || !target.allFinite())
      throw InvalidArgument("target ratios must be positive");
    log_target_ = (target / target.x()).array().log();
  }

  ScoreResponse score(const ScoreRequest& request) override {
    Vec3 ext = request.deformed_bounds.extent().cwiseMax(1e-300);
    Vec3 log_ratio = (ext / ext.x()).array().log();
    double sim = std::exp(-(log_ratio - log_target_).squaredNorm());
    return {std::vector<double>(request.views.size(), sim)};
  }
  std::string name() const override { return "proxy-aspect"; }
  bool needs_images() const override { return false; }

 private:
  Vec3 log_target_;
};

class SilhouetteScorer final : public Scorer {
 public:
  explicit SilhouetteScorer(std::vector<Mask> targets)
      : targets_(std::move(targets)) {
    if (targets_.empty()) throw InvalidArgument("no target masks");
  }

  ScoreResponse score(const ScoreRequest& request) override {
    ScoreResponse out;
    for (const auto& v : request.views) {
      if (v.view_index < 0 || v.view_index >= static_cast<int>(targets_.size()))
        throw InvalidArgument("no target mask for view " +
                              std::to_string(v.view_index));
      const Mask& target = targets_[v.view_index];
      if (target.width != v.image.width || target.height != v.image.height)
        throw InvalidArgument("target mask size does not match render size");
      out.similarities.push_back(mask_iou(silhouette(v.image, v.background), target));
    }
    return out;
  }
  std::string name() const override { return "proxy-silhouette"; }

 private:
  std::vector<Mask> targets_;
};

}  // namespace

std::unique_ptr<Scorer> proxy_aspect_scorer(const Vec3& target_ratios) {
  return std::make_unique<AspectScorer>(target_ratios);
}

std::unique_ptr<Scorer> proxy_silhouette_scorer(std::vector<Mask> targets) {
  return std::make_unique<SilhouetteScorer>(std::move(targets));
}

double clip_loss(std::span<const double> similarities) {
  if (similarities.empty()) throw InvalidArgument("no similarities");
  double sum = std::accumulate(similarities.begin(), similarities.end(), 0.0);
  return -sum / static_cast<double>(similarities.size());
}

double normal_loss(const std::vector<Vec3>& original_normals,
                   const Mesh& deformed, double weight) {
  if (weight < 0.0) throw InvalidArgument("normal weight must be >= 0");
  if (weight == 0.0) return 0.0;
  return weight * (1.0 - normal_consistency(original_normals, deformed));
}

Objective::Objective(const Mesh& mesh, const BoxDefGraph& graph,
                     Scorer& scorer, std::string prompt, ObjectiveConfig config)
    : mesh_(mesh),
      graph_(graph),
      scorer_(scorer),
      prompt_(std::move(prompt)),
      config_(std::move(config)),
      framing_(Framing::of(mesh)),
      rest_normals_(vertex_normals(mesh)) {
  if (config_.views.empty() || config_.backgrounds.empty())
    throw InvalidArgument("objective needs at least one view and background");
  if (config_.normal_weight < 0.0)
    throw InvalidArgument("normal weight must be >= 0");
}

ScoreRequest Objective::make_request(const Mesh& deformed) const {
  ScoreRequest req;
  req.prompt = prompt_;
  req.deformed_bounds = deformed.bounds();
  const bool pixels = scorer_.needs_images();
  for (std::size_t v = 0; v < config_.views.size(); ++v) {
    for (const auto& bg : config_.backgrounds) {
      RenderedView rv;
      rv.background = bg;
      rv.view_index = static_cast<int>(v);
      if (pixels)
        rv.image = render(deformed, config_.views[v], framing_, bg, config_.render);
      req.views.push_back(std::move(rv));
    }
  }
  return req;
}

ScoreResponse Objective::score(const ScoreRequest& request) const {
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    try {
      ScoreResponse resp;
      if (scorer_.concurrent()) {
        resp = scorer_.score(request);
      } else {
        std::lock_guard lock(serial_);
        resp = scorer_.score(request);
      }
      if (resp.similarities.size() != request.views.size())
        throw ScorerError("scorer returned " +
                          std::to_string(resp.similarities.size()) +
                          " similarities for " +
                          std::to_string(request.views.size()) + " images");
      return resp;
    } catch (const InvalidArgument&) {
      throw;  // configuration problems do not heal on retry
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw ScorerError(scorer_.name() + " failed after " +
                    std::to_string(config_.retries + 1) +
                    " attempts: " + last_error);
}

LossBreakdown Objective::evaluate_mesh(const Mesh& deformed) const {
  LossBreakdown out;
  out.similarities = score(make_request(deformed)).similarities;
  out.clip_term = clip_loss(out.similarities);
  out.normal_term = normal_loss(rest_normals_, deformed, config_.normal_weight);
  out.total = out.clip_term + out.normal_term;
  return out;
}

LossBreakdown Objective::evaluate(const DeformParams& params) const {
  return evaluate_mesh(deform(mesh_, graph_, params));
}

LossBreakdown evaluate(const Mesh& mesh, const BoxDefGraph& graph,
                       const DeformParams& params, Scorer& scorer,
                       const std::string& prompt,
                       const ObjectiveConfig& config) {
  Objective obj(mesh, graph, scorer, prompt, config);
  return obj.evaluate(params);
}

std::vector<Mask> silhouettes(const Mesh& mesh, const std::vector<Camera>& views,
                              const Framing& framing) {
  std::vector<Mask> out;
  for (const auto& cam : views)
    out.push_back(silhouette(render(mesh, cam, framing, kWhite), kWhite));
  return out;
}

}  // namespace boxdeform
