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

// boxdeform: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "boxdeform/boxdeform.h"

namespace {

struct MeshDeleter {
  void operator()(bd_mesh* m) const { bd_mesh_free(m); }
};
struct GraphDeleter {
  void operator()(bd_graph* g) const { bd_graph_free(g); }
};
struct ConfigDeleter {
  void operator()(bd_config* c) const { bd_config_free(c); }
};
struct ReportDeleter {
  void operator()(bd_report* r) const { bd_report_free(r); }
};
using MeshPtr = std::unique_ptr<bd_mesh, MeshDeleter>;

class Failure {
 public:
  explicit Failure(bd_status s) : status(s) {}
  bd_status status;
};

void check(bd_status s) {
  if (s != BD_OK) throw Failure(s);
}

MeshPtr load(const std::string& path) {
  bd_mesh* m = nullptr;
  check(bd_mesh_load(path.c_str(), &m));
  return MeshPtr(m);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bd_string_free(s);
  return out;
}

struct RunFlags {
  std::string config, mesh, prompt, scorer, splits, out, endpoint, command;
  std::string target_ratios, target_mesh;
  std::optional<unsigned long long> seed;
  std::optional<int> steps, generations, threads, resolution;
  bool quiet = false;
};

int do_run(const RunFlags& f) {
  bd_config* raw = nullptr;
  if (!f.config.empty())
    check(bd_config_load(f.config.c_str(), &raw));
  else
    check(bd_config_create(&raw));
  std::unique_ptr<bd_config, ConfigDeleter> cfg(raw);

  std::vector<std::pair<const char*, std::string>> overrides;
  auto add = [&](const char* key, const std::string& v) {
    if (!v.empty()) overrides.emplace_back(key, v);
  };
  add("mesh", f.mesh);
  add("prompt", f.prompt);
  add("scorer", f.scorer);
  add("splits", f.splits);
  add("out", f.out);
  add("endpoint", f.endpoint);
  add("command", f.command);
  add("target_ratios", f.target_ratios);
  add("target_mesh", f.target_mesh);
  if (f.seed) add("seed", std::to_string(*f.seed));
  if (f.steps) add("steps", std::to_string(*f.steps));
  if (f.generations) add("max_generations", std::to_string(*f.generations));
  if (f.threads) add("threads", std::to_string(*f.threads));
  if (f.resolution) add("resolution", std::to_string(*f.resolution));
  if ((!f.endpoint.empty() || !f.command.empty()) && f.scorer.empty())
    add("scorer", "remote");
  for (const auto& [k, v] : overrides) check(bd_config_set(cfg.get(), k, v.c_str()));

  bd_report* rep = nullptr;
  check(bd_run(cfg.get(), f.quiet ? 0 : 1, &rep));
  std::unique_ptr<bd_report, ReportDeleter> report(rep);
  int chosen = 0;
  double loss = 0.0;
  check(bd_report_chosen(report.get(), &chosen, &loss));
  if (!f.quiet)
    std::fprintf(stderr, "chose %d splits, loss %.6g, %.2f s\n", chosen, loss,
                 bd_report_wall_seconds(report.get()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Part-aware box deformation of triangle meshes"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "optimize box scales and write results");
  run->add_option("--config", rf.config, "key = value config file")->check(CLI::ExistingFile);
  run->add_option("--mesh", rf.mesh, "input OBJ");
  run->add_option("--prompt", rf.prompt, "text prompt");
  run->add_option("--scorer", rf.scorer, "proxy-aspect | proxy-silhouette | remote");
  run->add_option("--seed", rf.seed, "random seed");
  run->add_option("--splits", rf.splits, "box counts to try, e.g. 2,3,4");
  run->add_option("--out", rf.out, "output directory");
  run->add_option("--steps", rf.steps, "interpolation frames (0 disables)");
  run->add_option("--endpoint", rf.endpoint, "remote scorer URL");
  run->add_option("--command", rf.command, "remote scorer command (stdio)");
  run->add_option("--target-ratios", rf.target_ratios, "x,y,z extents for proxy-aspect");
  run->add_option("--target-mesh", rf.target_mesh, "OBJ whose silhouettes are the target");
  run->add_option("--generations", rf.generations, "CMA-ES generation budget");
  run->add_option("--threads", rf.threads, "evaluation threads (0 = all cores)");
  run->add_option("--resolution", rf.resolution, "voxel grid resolution");
  run->add_flag("--quiet", rf.quiet, "no progress output");

  std::string g_mesh, g_out;
  int g_splits = 3, g_res = 64;
  auto* graph = app.add_subcommand("graph", "print the box graph as JSON");
  graph->add_option("--mesh", g_mesh, "input OBJ")->required();
  graph->add_option("--splits", g_splits, "box count");
  graph->add_option("--resolution", g_res, "voxel grid resolution");
  graph->add_option("--out", g_out, "write JSON here instead of stdout");

  std::string m_original, m_deformed;
  auto* metrics = app.add_subcommand("metrics", "curvature change, self-intersection, normals");
  metrics->add_option("--original", m_original, "rest OBJ")->required();
  metrics->add_option("--deformed", m_deformed, "deformed OBJ")->required();

  std::string r_mesh, r_out;
  double r_az = 45.0, r_el = 20.0;
  int r_size = 224;
  auto* render = app.add_subcommand("render", "render a mesh to PNG");
  render->add_option("--mesh", r_mesh, "input OBJ")->required();
  render->add_option("--out", r_out, "output PNG")->required();
  render->add_option("--azimuth", r_az, "degrees");
  render->add_option("--elevation", r_el, "degrees");
  render->add_option("--size", r_size, "pixels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(rf);
    if (*graph) {
      auto mesh = load(g_mesh);
      bd_graph* g = nullptr;
      check(bd_graph_build(mesh.get(), g_splits, g_res, &g));
      std::unique_ptr<bd_graph, GraphDeleter> holder(g);
      char* json = nullptr;
      check(bd_graph_to_json(g, &json));
      std::string text = take(json);
      if (g_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream out(g_out);
        out << text << '\n';
        if (!out) {
          std::cerr << "error: cannot write " << g_out << '\n';
          return BD_ERR_IO;
        }
      }
      return 0;
    }
    if (*metrics) {
      auto a = load(m_original);
      auto b = load(m_deformed);
      double gc = 0, si = 0, nc = 0;
      check(bd_metrics(a.get(), b.get(), &gc, &si, &nc));
      std::printf("{\"gc_change\": %.17g, \"si_ratio\": %.17g, \"normal_consistency\": %.17g}\n",
                  gc, si, nc);
      return 0;
    }
    if (*render) {
      auto mesh = load(r_mesh);
      check(bd_render_png(mesh.get(), r_az, r_el, r_size, r_out.c_str()));
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << bd_last_error() << '\n';
    return static_cast<int>(f.status);
  }
  return 0;
}
