/*
 * Copyright 2026 The boxdeform Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libboxdeform.
 *
 * Every function returning bd_status leaves a description of the last
 * failure on the calling thread, readable with bd_last_error(). Handles are
 * opaque; release them with the matching bd_*_free. Strings returned
 * through char** are owned by the caller and released with bd_string_free.
 */

#ifndef BOXDEFORM_H_
#define BOXDEFORM_H_

#include <stddef.h>

#if defined(_WIN32)
#  ifdef BOXDEFORM_BUILDING
#    define BD_API __declspec(dllexport)
#  else
#    define BD_API __declspec(dllimport)
#  endif
#else
#  define BD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bd_status {
  BD_OK = 0,
  BD_ERR_INVALID_ARGUMENT = 1,
  BD_ERR_IO = 2,
  BD_ERR_PARSE = 3,
  BD_ERR_TOPOLOGY = 4,
  BD_ERR_SCORER = 5,
  BD_ERR_STAGE = 6,
  BD_ERR_INTERNAL = 7
} bd_status;

typedef struct bd_mesh bd_mesh;
typedef struct bd_graph bd_graph;
typedef struct bd_config bd_config;
typedef struct bd_report bd_report;

BD_API const char* bd_version(void);
/* Empty string when the last call on this thread succeeded. */
BD_API const char* bd_last_error(void);
BD_API const char* bd_status_name(bd_status status);
BD_API void bd_string_free(char* s);

/* Meshes */
BD_API bd_status bd_mesh_load(const char* path, bd_mesh** out);
BD_API bd_status bd_mesh_save(const bd_mesh* mesh, const char* path);
BD_API bd_status bd_mesh_counts(const bd_mesh* mesh, size_t* vertices,
                                size_t* faces);
/* Copies 3 * vertex count doubles into xyz; capacity counts doubles. */
BD_API bd_status bd_mesh_vertices(const bd_mesh* mesh, double* xyz,
                                  size_t capacity);
BD_API void bd_mesh_free(bd_mesh* mesh);

/* Any output pointer may be NULL. */
BD_API bd_status bd_metrics(const bd_mesh* original, const bd_mesh* deformed,
                            double* gc_change, double* si_ratio,
                            double* normal_consistency);

/* Box graph: voxelize at `resolution`, split into up to `split_count`
 * boxes, build graph, tree and constraints. */
BD_API bd_status bd_graph_build(const bd_mesh* mesh, int split_count,
                                int resolution, bd_graph** out);
BD_API bd_status bd_graph_box_count(const bd_graph* graph, size_t* count);
BD_API bd_status bd_graph_to_json(const bd_graph* graph, char** json);
BD_API void bd_graph_free(bd_graph* graph);

/* scales holds 3 * box count positive values, box-major. */
BD_API bd_status bd_deform(const bd_mesh* mesh, const bd_graph* graph,
                           const double* scales, size_t count, bd_mesh** out);

/* Grey mesh on white, framed by the mesh itself. */
BD_API bd_status bd_render_png(const bd_mesh* mesh, double azimuth_deg,
                               double elevation_deg, int size,
                               const char* path);

/* Pipeline configuration. Keys match the config file format. */
BD_API bd_status bd_config_create(bd_config** out);
BD_API bd_status bd_config_load(const char* path, bd_config** out);
BD_API bd_status bd_config_set(bd_config* config, const char* key,
                               const char* value);
BD_API void bd_config_free(bd_config* config);

/* Runs the pipeline and writes its outputs. Progress goes to stderr when
 * verbose is nonzero. A failing stage returns the status of its cause and
 * bd_last_error() starts with the stage name in brackets, e.g. "[load] ". */
BD_API bd_status bd_run(const bd_config* config, int verbose, bd_report** out);
BD_API bd_status bd_report_json(const bd_report* report, char** json);
BD_API bd_status bd_report_chosen(const bd_report* report, int* split_count,
                                  double* loss);
BD_API double bd_report_wall_seconds(const bd_report* report);
BD_API void bd_report_free(bd_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BOXDEFORM_H_ */
