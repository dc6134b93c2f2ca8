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

// End-to-end driver: voxelize, split into boxes for each requested box
// count, optimize box scales against the objective, keep the best count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "boxdeform/cmaes.hpp"
#include "boxdeform/def_graph.hpp"
#include "boxdeform/objective.hpp"

namespace boxdeform {

struct RunConfig {
  std::filesystem::path mesh;
  std::string prompt = "a 3D shape";

  // proxy-aspect | proxy-silhouette | remote
  std::string scorer = "proxy-silhouette";
  Vec3 target_ratios = Vec3::Ones();
  bool has_target_ratios = false;
  std::filesystem::path target_mesh;                // proxy-silhouette
  std::vector<std::filesystem::path> target_masks;  // PBM, one per view
  std::string endpoint;                             // remote over HTTP
  std::string command;                              // remote over stdio
  int timeout_ms = 120000;
  int retries = 2;

  std::vector<int> splits{2, 3, 4};
  int resolution = 64;
  int slab_width = 1;
  int min_vertices = 8;

  int views = 4;
  double elevation = 20.0;
  int image_size = 224;

  std::uint64_t seed = 1;
  double sigma0 = 0.3;
  int lambda = 0;  // 0: 4 + floor(3 ln n)
  int max_generations = 150;
  double stall_tolerance = 1e-6;
  int stall_generations = 20;
  double scale_min = 1.0 / 3.0;
  double scale_max = 3.0;
  double normal_weight = 1.0;

  std::filesystem::path out = "out";
  int steps = 8;    // interpolation frames; 0 disables
  int threads = 0;  // 0: hardware concurrency
};

// Sets one key from its text form. Throws InvalidArgument for unknown keys
// or bad values. `base` resolves relative paths.
void set_config_value(RunConfig& config, const std::string& key,
                      const std::string& value,
                      const std::filesystem::path& base = {});

// key = value lines; '#' starts a comment; strings may be double-quoted;
// lists are written [a, b, c]. Relative paths resolve against the file's
// directory. Throws ParseError with the offending line.
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

// Throws InvalidArgument describing the first problem found.
void validate_config(const RunConfig& config);

struct SplitRecord {
  int split_count = 0;
  int box_count = 0;  // may be lower when no further cut is admissible
  LossBreakdown loss;
  std::vector<Vec3> scales;
  int generations = 0;
  long evaluations = 0;
  std::string stop_reason;
  std::vector<TraceRow> trace;
};

struct RunMetrics {
  double score = 0.0;  // front-right view, white background
  double gc_change = 0.0;
  double si_ratio = 0.0;
};

struct RunReport {
  std::vector<SplitRecord> sweep;
  int chosen_split_count = 0;
  std::size_t chosen_index = 0;
  RunMetrics metrics;
  double wall_seconds = 0.0;
  std::string prompt;
  std::string scorer;
  std::uint64_t seed = 0;

  // Everything except wall time, so identical runs give identical bytes.
  std::string to_json() const;
};

struct RunResult {
  RunReport report;
  Mesh deformed;
  std::vector<Mesh> frames;
};

// Runs the sweep without touching the filesystem beyond reading inputs.
// Errors are rethrown as StageError.
RunResult execute(const RunConfig& config, std::ostream* log = nullptr);

// execute() then writes deformed.obj, report.json, trace.csv, timing.json
// and frames/frame_###.obj under config.out. Files written by a failed run
// are removed.
RunReport run(const RunConfig& config, std::ostream* log = nullptr);

std::unique_ptr<Scorer> make_scorer(const RunConfig& config, const Mesh& source,
                                    const ObjectiveConfig& objective);

// steps frames with scales exp(t ln s), t = 0 .. 1 evenly spaced. The end
// frames are exactly the input and deform(params).
std::vector<Mesh> interpolate(const Mesh& mesh, const BoxDefGraph& graph,
                              const DeformParams& params, int steps);

// Score of a single 45 degree azimuth render on white, framed by the
// original mesh, plus curvature change and self-intersection ratio.
RunMetrics report_metrics(const Mesh& original, const Mesh& deformed,
                          Scorer& scorer, const std::string& prompt,
                          const Camera& camera = {});

DeformParams params_from_vector(const VecX& scales);
VecX params_to_vector(const DeformParams& params);

}  // namespace boxdeform
