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

#include "boxdeform/boxdeform.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <new>
#include <string>

#include "boxdeform/error.hpp"
#include "boxdeform/occupancy.hpp"
#include "boxdeform/pipeline.hpp"

using namespace boxdeform;

struct bd_mesh {
  Mesh mesh;
};

struct bd_graph {
  BoxDefGraph graph;
};

struct bd_config {
  RunConfig config;
};

struct bd_report {
  RunReport report;
};

namespace {

thread_local std::string g_last_error;

bd_status fail(bd_status status, const char* what) {
  g_last_error = what;
  return status;
}

bd_status invalid(const char* what) { return fail(BD_ERR_INVALID_ARGUMENT, what); }

// Runs `body` and converts any exception into a status.
template <class F>
bd_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BD_OK;
  } catch (const Error& e) {
    return fail(static_cast<bd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BD_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

BD_API const char* bd_version(void) { return "0.1.0"; }

BD_API const char* bd_last_error(void) { return g_last_error.c_str(); }

BD_API const char* bd_status_name(bd_status status) {
  switch (status) {
    case BD_OK: return "ok";
    case BD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BD_ERR_IO: return "i/o error";
    case BD_ERR_PARSE: return "parse error";
    case BD_ERR_TOPOLOGY: return "topology error";
    case BD_ERR_SCORER: return "scorer error";
    case BD_ERR_STAGE: return "stage error";
    case BD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

BD_API void bd_string_free(char* s) { std::free(s); }

BD_API bd_status bd_mesh_load(const char* path, bd_mesh** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new bd_mesh{load_obj(path)}; });
}

BD_API bd_status bd_mesh_save(const bd_mesh* mesh, const char* path) {
  if (!mesh || !path) return invalid("null argument");
  return guarded([&] { save_obj(mesh->mesh, path); });
}

BD_API bd_status bd_mesh_counts(const bd_mesh* mesh, size_t* vertices, size_t* faces) {
  if (!mesh) return invalid("null mesh");
  if (vertices) *vertices = mesh->mesh.vertices.size();
  if (faces) *faces = mesh->mesh.faces.size();
  g_last_error.clear();
  return BD_OK;
}

BD_API bd_status bd_mesh_vertices(const bd_mesh* mesh, double* xyz, size_t capacity) {
  if (!mesh || !xyz) return invalid("null argument");
  const auto& v = mesh->mesh.vertices;
  if (capacity < 3 * v.size()) return invalid("vertex buffer too small");
  for (size_t i = 0; i < v.size(); ++i)
    for (int a = 0; a < 3; ++a) xyz[3 * i + a] = v[i][a];
  g_last_error.clear();
  return BD_OK;
}

BD_API void bd_mesh_free(bd_mesh* mesh) { delete mesh; }

BD_API bd_status bd_metrics(const bd_mesh* original, const bd_mesh* deformed,
                            double* gc_change, double* si_ratio,
                            double* normal_consistency_out) {
  if (!original || !deformed) return invalid("null mesh");
  return guarded([&] {
    double gc = gaussian_curvature_change(original->mesh, deformed->mesh);
    double si = self_intersection_ratio(deformed->mesh);
    double nc = normal_consistency(vertex_normals(original->mesh), deformed->mesh);
    if (gc_change) *gc_change = gc;
    if (si_ratio) *si_ratio = si;
    if (normal_consistency_out) *normal_consistency_out = nc;
  });
}

BD_API bd_status bd_graph_build(const bd_mesh* mesh, int split_count, int resolution,
                                bd_graph** out) {
  if (!mesh || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    OccupancyGrid grid = voxelize(mesh->mesh, resolution);
    auto boxes = generate_boxes(mesh->mesh, grid, split_count);
    *out = new bd_graph{make_def_graph(mesh->mesh, std::move(boxes))};
  });
}

BD_API bd_status bd_graph_box_count(const bd_graph* graph, size_t* count) {
  if (!graph || !count) return invalid("null argument");
  *count = graph->graph.box_count();
  g_last_error.clear();
  return BD_OK;
}

BD_API bd_status bd_graph_to_json(const bd_graph* graph, char** json) {
  if (!graph || !json) return invalid("null argument");
  *json = nullptr;
  return guarded([&] { *json = copy_string(graph_to_json(graph->graph)); });
}

BD_API void bd_graph_free(bd_graph* graph) { delete graph; }

BD_API bd_status bd_deform(const bd_mesh* mesh, const bd_graph* graph,
                           const double* scales, size_t count, bd_mesh** out) {
  if (!mesh || !graph || !scales || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    if (count != 3 * graph->graph.box_count())
      throw InvalidArgument("expected " + std::to_string(3 * graph->graph.box_count()) +
                            " scale values, got " + std::to_string(count));
    DeformParams p;
    for (size_t b = 0; b < count; b += 3)
      p.scales.emplace_back(scales[b], scales[b + 1], scales[b + 2]);
    *out = new bd_mesh{deform(mesh->mesh, graph->graph, p)};
  });
}

BD_API bd_status bd_render_png(const bd_mesh* mesh, double azimuth_deg,
                               double elevation_deg, int size, const char* path) {
  if (!mesh || !path) return invalid("null argument");
  if (size < 32) return invalid("image size must be >= 32");
  return guarded([&] {
    Camera cam;
    cam.azimuth_deg = azimuth_deg;
    cam.elevation_deg = elevation_deg;
    cam.width = cam.height = size;
    write_png(render(mesh->mesh, cam, kWhite), path);
  });
}

BD_API bd_status bd_config_create(bd_config** out) {
  if (!out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new bd_config{}; });
}

BD_API bd_status bd_config_load(const char* path, bd_config** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new bd_config{load_config(path)}; });
}

BD_API bd_status bd_config_set(bd_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return invalid("null argument");
  return guarded([&] { set_config_value(config->config, key, value); });
}

BD_API void bd_config_free(bd_config* config) { delete config; }

BD_API bd_status bd_run(const bd_config* config, int verbose, bd_report** out) {
  if (!config || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new bd_report{run(config->config, verbose ? &std::cerr : nullptr)};
  });
}

BD_API bd_status bd_report_json(const bd_report* report, char** json) {
  if (!report || !json) return invalid("null argument");
  *json = nullptr;
  return guarded([&] { *json = copy_string(report->report.to_json()); });
}

BD_API bd_status bd_report_chosen(const bd_report* report, int* split_count,
                                  double* loss) {
  if (!report) return invalid("null report");
  const auto& r = report->report;
  if (r.sweep.empty()) return fail(BD_ERR_INTERNAL, "report has no sweep entries");
  if (split_count) *split_count = r.chosen_split_count;
  if (loss) *loss = r.sweep[r.chosen_index].loss.total;
  g_last_error.clear();
  return BD_OK;
}

BD_API double bd_report_wall_seconds(const bd_report* report) {
  return report ? report->report.wall_seconds : 0.0;
}

BD_API void bd_report_free(bd_report* report) { delete report; }

}  // extern "C"
