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

#include "boxdeform/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "boxdeform/error.hpp"
#include "boxdeform/occupancy.hpp"

namespace boxdeform {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
  return t;
}

std::vector<std::string> split_list(const std::string& value) {
  std::string t = trim(value);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw InvalidArgument("unterminated list: " + value);
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::string t = unquote(text);
  T v{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidArgument("bad value for " + key + ": '" + text + "'");
  return v;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p = unquote(value);
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what(), e.code());
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), ErrorCode::kInternal);
  }
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key,
                      const std::string& value, const fs::path& base) {
  const std::string v = unquote(value);
  if (key == "mesh") {
    c.mesh = resolve(base, value);
  } else if (key == "prompt") {
    c.prompt = v;
  } else if (key == "scorer") {
    c.scorer = v;
  } else if (key == "target_ratios") {
    auto items = split_list(value);
    if (items.size() != 3) throw InvalidArgument("target_ratios needs 3 values");
    for (int i = 0; i < 3; ++i) c.target_ratios[i] = parse_number<double>(key, items[i]);
    c.has_target_ratios = true;
  } else if (key == "target_mesh") {
    c.target_mesh = resolve(base, value);
  } else if (key == "target_masks") {
    c.target_masks.clear();
    for (const auto& item : split_list(value)) c.target_masks.push_back(resolve(base, item));
  } else if (key == "endpoint") {
    c.endpoint = v;
  } else if (key == "command") {
    c.command = v;
  } else if (key == "timeout_ms") {
    c.timeout_ms = parse_number<int>(key, value);
  } else if (key == "retries") {
    c.retries = parse_number<int>(key, value);
  } else if (key == "splits") {
    c.splits.clear();
    for (const auto& item : split_list(value)) c.splits.push_back(parse_number<int>(key, item));
  } else if (key == "resolution") {
    c.resolution = parse_number<int>(key, value);
  } else if (key == "slab_width") {
    c.slab_width = parse_number<int>(key, value);
  } else if (key == "min_vertices") {
    c.min_vertices = parse_number<int>(key, value);
  } else if (key == "views") {
    c.views = parse_number<int>(key, value);
  } else if (key == "elevation") {
    c.elevation = parse_number<double>(key, value);
  } else if (key == "image_size") {
    c.image_size = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "sigma0") {
    c.sigma0 = parse_number<double>(key, value);
  } else if (key == "lambda") {
    c.lambda = parse_number<int>(key, value);
  } else if (key == "max_generations") {
    c.max_generations = parse_number<int>(key, value);
  } else if (key == "stall_tolerance") {
    c.stall_tolerance = parse_number<double>(key, value);
  } else if (key == "stall_generations") {
    c.stall_generations = parse_number<int>(key, value);
  } else if (key == "scale_min") {
    c.scale_min = parse_number<double>(key, value);
  } else if (key == "scale_max") {
    c.scale_max = parse_number<double>(key, value);
  } else if (key == "normal_weight") {
    c.normal_weight = parse_number<double>(key, value);
  } else if (key == "out") {
    c.out = resolve(base, value);
  } else if (key == "steps") {
    c.steps = parse_number<int>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, value);
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text, const fs::path& base) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "missing key");
    try {
      set_config_value(c, key, line.substr(eq + 1), base);
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw InvalidArgument(m); };
  if (c.mesh.empty()) fail("no input mesh given");
  if (!fs::exists(c.mesh)) fail("mesh not found: " + c.mesh.string());
  if (c.prompt.empty()) fail("prompt must not be empty");
  if (c.splits.empty()) fail("no split counts given");
  for (int s : c.splits)
    if (s < 1 || s > 16) fail("split count " + std::to_string(s) + " outside [1, 16]");
  if (c.resolution < 8 || c.resolution > 512) fail("resolution must be in [8, 512]");
  if (c.slab_width < 1) fail("slab_width must be >= 1");
  if (c.min_vertices < 1) fail("min_vertices must be >= 1");
  if (c.views < 1) fail("views must be >= 1");
  if (c.image_size < 32) fail("image_size must be >= 32");
  if (!(c.sigma0 > 0.0)) fail("sigma0 must be positive");
  if (c.lambda != 0 && c.lambda < 2) fail("lambda must be 0 (auto) or >= 2");
  if (c.max_generations < 1) fail("max_generations must be >= 1");
  if (c.stall_generations < 0) fail("stall_generations must be >= 0");
  if (!(c.scale_min > 0.0) || c.scale_min > 1.0) fail("scale_min must be in (0, 1]");
  if (!(c.scale_max >= 1.0) || !std::isfinite(c.scale_max)) fail("scale_max must be >= 1");
  if (!(c.normal_weight >= 0.0)) fail("normal_weight must be >= 0");
  if (c.steps != 0 && c.steps < 2) fail("steps must be 0 or >= 2");
  if (c.retries < 0) fail("retries must be >= 0");
  if (c.threads < 0) fail("threads must be >= 0");
  if (c.scorer == "proxy-aspect") {
    if (!c.has_target_ratios) fail("proxy-aspect needs target_ratios");
    if ((c.target_ratios.array() <= 0.0).any()) fail("target_ratios must be positive");
  } else if (c.scorer == "proxy-silhouette") {
    if (!c.target_mesh.empty() && !c.target_masks.empty())
      fail("give target_mesh or target_masks, not both");
    if (!c.target_mesh.empty() && !fs::exists(c.target_mesh))
      fail("target mesh not found: " + c.target_mesh.string());
    if (!c.target_masks.empty() && static_cast<int>(c.target_masks.size()) != c.views)
      fail("need one target mask per view");
    for (const auto& m : c.target_masks)
      if (!fs::exists(m)) fail("target mask not found: " + m.string());
  } else if (c.scorer == "remote") {
    if (c.endpoint.empty() == c.command.empty())
      fail("remote scorer needs exactly one of endpoint or command");
    if (c.timeout_ms < 1) fail("timeout_ms must be positive");
  } else {
    fail("unknown scorer '" + c.scorer + "'");
  }
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& c, const Mesh& source,
                                    const ObjectiveConfig& oc) {
  if (c.scorer == "proxy-aspect") return proxy_aspect_scorer(c.target_ratios);
  if (c.scorer == "proxy-silhouette") {
    std::vector<Mask> masks;
    if (!c.target_masks.empty()) {
      for (const auto& p : c.target_masks) {
        Mask m = read_pbm(p);
        if (m.width != c.image_size || m.height != c.image_size)
          throw InvalidArgument(p.string() + " is not " + std::to_string(c.image_size) +
                                " pixels square");
        masks.push_back(std::move(m));
      }
    } else {
      Mesh target = c.target_mesh.empty() ? source : load_obj(c.target_mesh);
      masks = silhouettes(target, oc.views, Framing::of(source));
    }
    return proxy_silhouette_scorer(std::move(masks));
  }
  if (!c.endpoint.empty())
    return http_scorer(c.endpoint, std::chrono::milliseconds(c.timeout_ms));
  return process_scorer(c.command);
}

DeformParams params_from_vector(const VecX& scales) {
  if (scales.size() % 3 != 0) throw InvalidArgument("scale vector length not a multiple of 3");
  DeformParams p;
  for (Eigen::Index i = 0; i < scales.size(); i += 3)
    p.scales.emplace_back(scales[i], scales[i + 1], scales[i + 2]);
  return p;
}

VecX params_to_vector(const DeformParams& params) {
  VecX v(3 * params.scales.size());
  for (std::size_t b = 0; b < params.scales.size(); ++b) v.segment<3>(3 * b) = params.scales[b];
  return v;
}

std::vector<Mesh> interpolate(const Mesh& mesh, const BoxDefGraph& graph,
                              const DeformParams& params, int steps) {
  if (steps < 2) throw InvalidArgument("interpolate needs at least 2 steps");
  std::vector<Mesh> frames;
  for (int k = 0; k < steps; ++k) {
    DeformParams p = params;
    if (k == 0) {
      p = DeformParams::identity(params.scales.size());
    } else if (k < steps - 1) {
      double t = static_cast<double>(k) / (steps - 1);
      for (auto& s : p.scales) s = (t * s.array().log()).exp();
    }
    frames.push_back(deform(mesh, graph, p));
  }
  return frames;
}

RunMetrics report_metrics(const Mesh& original, const Mesh& deformed,
                          Scorer& scorer, const std::string& prompt,
                          const Camera& camera) {
  ScoreRequest req;
  req.prompt = prompt;
  req.deformed_bounds = deformed.bounds();
  RenderedView view;
  view.background = kWhite;
  view.view_index = 0;
  if (scorer.needs_images())
    view.image = render(deformed, camera, Framing::of(original), kWhite);
  req.views.push_back(std::move(view));
  ScoreResponse resp = scorer.score(req);
  if (resp.similarities.size() != 1)
    throw ScorerError("expected one similarity for the metric view");
  RunMetrics m;
  m.score = resp.similarities[0];
  m.gc_change = gaussian_curvature_change(original, deformed);
  m.si_ratio = self_intersection_ratio(deformed);
  return m;
}

std::string RunReport::to_json() const {
  using nlohmann::ordered_json;
  auto vec = [](const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); };
  ordered_json sweep_json = ordered_json::array();
  for (const auto& r : sweep) {
    ordered_json scales = ordered_json::array();
    for (const auto& s : r.scales) scales.push_back(vec(s));
    sweep_json.push_back({{"split_count", r.split_count},
                          {"box_count", r.box_count},
                          {"final_loss", r.loss.total},
                          {"clip_term", r.loss.clip_term},
                          {"normal_term", r.loss.normal_term},
                          {"similarities", r.loss.similarities},
                          {"scales", scales},
                          {"generations", r.generations},
                          {"evaluations", r.evaluations},
                          {"stop_reason", r.stop_reason}});
  }
  ordered_json j = {{"prompt", prompt},
                    {"scorer", scorer},
                    {"seed", seed},
                    {"sweep", sweep_json},
                    {"chosen_split_count", chosen_split_count},
                    {"metrics",
                     {{"score", metrics.score},
                      {"gc_change", metrics.gc_change},
                      {"si_ratio", metrics.si_ratio}}}};
  return j.dump(2) + "\n";
}

RunResult execute(const RunConfig& config, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  in_stage("config", [&] { validate_config(config); });
  Mesh mesh = in_stage("load", [&] { return load_obj(config.mesh); });
  OccupancyGrid grid = in_stage("voxelize", [&] { return voxelize(mesh, config.resolution); });

  ObjectiveConfig oc;
  oc.views = view_set(config.views, config.elevation, config.image_size);
  oc.normal_weight = config.normal_weight;
  oc.retries = config.retries;
  auto scorer = in_stage("scorer", [&] { return make_scorer(config, mesh, oc); });

  std::vector<int> counts = config.splits;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

  const BoundedEncoding enc{config.scale_min, config.scale_max};
  const int threads = config.threads > 0
                          ? config.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  RunResult result;
  RunReport& report = result.report;
  report.prompt = config.prompt;
  report.scorer = config.scorer;
  report.seed = config.seed;
  std::vector<BoxDefGraph> graphs;

  for (int count : counts) {
    auto boxes = in_stage("split", [&] {
      return generate_boxes(mesh, grid, count, {config.slab_width, config.min_vertices});
    });
    graphs.push_back(in_stage("graph", [&] { return make_def_graph(mesh, std::move(boxes)); }));
    const BoxDefGraph& graph = graphs.back();

    SplitRecord rec;
    rec.split_count = count;
    rec.box_count = static_cast<int>(graph.box_count());
    in_stage("optimize", [&] {
      Objective objective(mesh, graph, *scorer, config.prompt, oc);
      Fitness f = [&](const VecX& x) {
        return objective.evaluate(params_from_vector(enc.decode(x))).total;
      };
      MinimizeOptions mo;
      mo.sigma0 = config.sigma0;
      if (config.lambda > 0) mo.lambda = config.lambda;
      mo.seed = config.seed + static_cast<std::uint64_t>(count);
      mo.max_generations = config.max_generations;
      mo.stall_tolerance = config.stall_tolerance;
      mo.stall_generations = config.stall_generations;
      mo.threads = threads;
      MinimizeResult res = minimize(f, VecX::Zero(3 * rec.box_count), mo);
      DeformParams best = params_from_vector(enc.decode(res.best_x));
      rec.loss = objective.evaluate(best);
      rec.scales = best.scales;
      rec.generations = res.generations;
      rec.evaluations = res.evaluations;
      rec.stop_reason = res.stop_reason;
      rec.trace = std::move(res.trace);
    });
    if (log)
      *log << "splits=" << count << " boxes=" << rec.box_count
           << " generations=" << rec.generations << " loss=" << format_double(rec.loss.total)
           << " (" << rec.stop_reason << ")\n";
    report.sweep.push_back(std::move(rec));
  }

  for (std::size_t i = 1; i < report.sweep.size(); ++i)
    if (report.sweep[i].loss.total < report.sweep[report.chosen_index].loss.total)
      report.chosen_index = i;
  const SplitRecord& chosen = report.sweep[report.chosen_index];
  report.chosen_split_count = chosen.split_count;
  const BoxDefGraph& graph = graphs[report.chosen_index];
  const DeformParams params{chosen.scales};
  result.deformed = deform(mesh, graph, params);

  report.metrics = in_stage("metrics", [&] {
    Camera cam;
    cam.elevation_deg = config.elevation;
    cam.width = cam.height = config.image_size;
    return report_metrics(mesh, result.deformed, *scorer, config.prompt, cam);
  });
  if (config.steps > 0) result.frames = interpolate(mesh, graph, params, config.steps);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

RunReport run(const RunConfig& config, std::ostream* log) {
  RunResult result = execute(config, log);
  std::vector<fs::path> written;
  bool made_frames_dir = false;
  try {
    fs::create_directories(config.out);
    auto write_text = [&](const fs::path& p, const std::string& text) {
      written.push_back(p);
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + p.string());
      out << text;
      if (!out) throw IoError("failed writing " + p.string());
    };
    write_text(config.out / "deformed.obj", format_obj(result.deformed));
    write_text(config.out / "report.json", result.report.to_json());

    std::ostringstream trace;
    trace << "split_count,generation,evaluations,best_fitness,mean_fitness,sigma\n";
    for (const auto& rec : result.report.sweep)
      for (const auto& r : rec.trace)
        trace << rec.split_count << ',' << r.generation << ',' << r.evaluations << ','
              << format_double(r.best_fitness) << ',' << format_double(r.mean_fitness)
              << ',' << format_double(r.sigma) << '\n';
    write_text(config.out / "trace.csv", trace.str());
    write_text(config.out / "timing.json",
               nlohmann::json{{"wall_seconds", result.report.wall_seconds}}.dump() + "\n");

    if (!result.frames.empty()) {
      const fs::path dir = config.out / "frames";
      made_frames_dir = fs::create_directories(dir);
      for (std::size_t k = 0; k < result.frames.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu.obj", k);
        write_text(dir / name, format_obj(result.frames[k]));
      }
    }
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    if (made_frames_dir) fs::remove(config.out / "frames", ec);
    const auto* err = dynamic_cast<const Error*>(&e);
    throw StageError("write", e.what(), err ? err->code() : ErrorCode::kIo);
  }
  return result.report;
}

}  // namespace boxdeform
