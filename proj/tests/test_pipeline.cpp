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


#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boxdeform/box_split.hpp"
#include "boxdeform/error.hpp"
#include "boxdeform/pipeline.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace boxdeform;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig quick_config(const std::string& name) {
  fs::path dir = fixtures::temp_dir(name);
  save_obj(fixtures::dumbbell(0.25, 0.5), dir / "in.obj");
  RunConfig c;
  c.mesh = dir / "in.obj";
  c.splits = {2};
  c.resolution = 16;
  c.views = 2;
  c.image_size = 48;
  c.max_generations = 4;
  c.steps = 3;
  c.threads = 2;
  c.out = dir / "out";
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  RunConfig c = parse_config(
      "# run settings\n"
      "mesh = meshes/chair.obj\n"
      "prompt = \"a tall # chair\"   # trailing comment\n"
      "scorer = proxy-aspect\n"
      "target_ratios = [1, 2.5, 0.5]\n"
      "splits = 2, 3\n"
      "seed = 42\n"
      "sigma0 = 0.2\n"
      "target_masks = [a.pbm, b.pbm]\n"
      "\n"
      "out = results\n",
      "/data/runs");
  CHECK(c.mesh == fs::path("/data/runs/meshes/chair.obj"));
  CHECK(c.prompt == "a tall # chair");
  CHECK(c.scorer == "proxy-aspect");
  CHECK(c.has_target_ratios);
  CHECK(c.target_ratios == Vec3(1, 2.5, 0.5));
  CHECK(c.splits == std::vector<int>{2, 3});
  CHECK(c.seed == 42);
  CHECK(c.sigma0 == 0.2);
  CHECK(c.target_masks.size() == 2);
  CHECK(c.target_masks[1] == fs::path("/data/runs/b.pbm"));
  CHECK(c.out == fs::path("/data/runs/results"));
  CHECK(c.resolution == 64);  // untouched default

  RunConfig abs = parse_config("mesh = /abs/m.obj\n", "/base");
  CHECK(abs.mesh == fs::path("/abs/m.obj"));
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("seed = 1\nbogus = 3\n") == 2);
  CHECK(line_of("seed = 1\n\nseed = x\n") == 3);
  CHECK(line_of("just text\n") == 1);
  CHECK(line_of("target_ratios = 1, 2\n") == 1);
  CHECK(line_of("= 4\n") == 1);
  CHECK(line_of("resolution = 12abc\n") == 1);
  RunConfig c;
  CHECK_THROWS_AS(set_config_value(c, "nope", "1"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("load_config resolves paths against the file") {
  fs::path dir = fixtures::temp_dir("cfg_load");
  {
    std::ofstream out(dir / "run.cfg");
    out << "mesh = shapes/x.obj\nsteps = 0\n";
  }
  RunConfig c = load_config(dir / "run.cfg");
  CHECK(c.mesh == dir / "shapes/x.obj");
  CHECK(c.steps == 0);
}

TEST_CASE("config validation") {
  RunConfig good = quick_config("validate");
  CHECK_NOTHROW(validate_config(good));
  auto bad = [&](auto mutate) {
    RunConfig c = good;
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  };
  bad([](RunConfig& c) { c.mesh = "/nonexistent.obj"; });
  bad([](RunConfig& c) { c.splits = {}; });
  bad([](RunConfig& c) { c.splits = {0}; });
  bad([](RunConfig& c) { c.splits = {17}; });
  bad([](RunConfig& c) { c.resolution = 4; });
  bad([](RunConfig& c) { c.sigma0 = 0; });
  bad([](RunConfig& c) { c.lambda = 1; });
  bad([](RunConfig& c) { c.scale_min = 2; });
  bad([](RunConfig& c) { c.scale_max = 0.5; });
  bad([](RunConfig& c) { c.steps = 1; });
  bad([](RunConfig& c) { c.image_size = 16; });
  bad([](RunConfig& c) { c.prompt = ""; });
  bad([](RunConfig& c) { c.scorer = "proxy-aspect"; });
  bad([](RunConfig& c) { c.scorer = "remote"; });
  bad([](RunConfig& c) {
    c.scorer = "remote";
    c.endpoint = "http://127.0.0.1:1";
    c.command = "cat";
  });
  bad([](RunConfig& c) { c.scorer = "clip"; });
}

TEST_CASE("parameter vector layout") {
  DeformParams p{{Vec3(1, 2, 3), Vec3(4, 5, 6)}};
  VecX v = params_to_vector(p);
  CHECK(v.size() == 6);
  CHECK(v[3] == 4.0);
  CHECK(params_from_vector(v).scales == p.scales);
  CHECK_THROWS_AS(params_from_vector(VecX::Zero(4)), InvalidArgument);
}

TEST_CASE("interpolation") {
  Mesh m = fixtures::dumbbell(0.25, 0.5);
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, 16), 2));
  DeformParams p{{Vec3(2.0, 0.5, 1.0), Vec3(1.0, 1.0, 3.0)}};
  auto frames = interpolate(m, g, p, 3);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].vertices == m.vertices);
  CHECK(frames[2].vertices == deform(m, g, p).vertices);
  DeformParams mid{{Vec3(std::sqrt(2.0), std::sqrt(0.5), 1.0), Vec3(1.0, 1.0, std::sqrt(3.0))}};
  Mesh want = deform(m, g, mid);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.vertex_count(); ++i)
    worst = std::max(worst, (frames[1].vertices[i] - want.vertices[i]).norm());
  CHECK(worst <= 1e-12);
  for (const auto& f : frames) CHECK(f.faces == m.faces);
  CHECK_THROWS_AS(interpolate(m, g, p, 1), InvalidArgument);
}

TEST_CASE("report metrics") {
  Mesh m = fixtures::dumbbell(0.25, 0.5);
  Camera cam;
  cam.width = cam.height = 64;
  auto target = proxy_silhouette_scorer({silhouette(render(m, cam, Framing::of(m), kWhite), kWhite)});
  RunMetrics r = report_metrics(m, m, *target, "p", cam);
  CHECK(r.score == 1.0);
  CHECK(r.gc_change == 0.0);
  CHECK(r.si_ratio == self_intersection_ratio(m));
  CHECK(cam.azimuth_deg == 45.0);  // front-right view
}

TEST_CASE("execute: self-target run is deterministic and well formed") {
  RunConfig c = quick_config("exec");
  RunResult a = execute(c);
  RunResult b = execute(c);
  CHECK(a.deformed.vertices == b.deformed.vertices);
  CHECK(a.report.to_json() == b.report.to_json());

  auto j = nlohmann::json::parse(a.report.to_json());
  for (const char* key : {"prompt", "scorer", "seed", "sweep", "chosen_split_count", "metrics"})
    CHECK(j.contains(key));
  CHECK_FALSE(j.contains("wall_seconds"));
  REQUIRE(j["sweep"].size() == 1);
  const auto& s = j["sweep"][0];
  for (const char* key : {"split_count", "box_count", "final_loss", "clip_term", "normal_term",
                          "similarities", "scales", "generations", "evaluations", "stop_reason"})
    CHECK(s.contains(key));
  CHECK(s["box_count"] == 2);
  CHECK(s["scales"].size() == 2);
  CHECK(s["similarities"].size() == 2 * 3);
  CHECK(s["final_loss"].get<double>() == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(a.frames.size() == 3);
  CHECK(a.report.wall_seconds > 0.0);
  // Identity is in the search space and scores -1; the optimizer can only
  // tie or come close.
  CHECK(a.report.sweep[0].loss.total >= -1.0);
}

TEST_CASE("execute: sweep picks the lowest loss, ties to fewer splits") {
  RunConfig c = quick_config("sweep");
  c.splits = {3, 1, 2, 2};
  RunResult r = execute(c);
  REQUIRE(r.report.sweep.size() == 3);
  CHECK(r.report.sweep[0].split_count == 1);
  CHECK(r.report.sweep[2].split_count == 3);
  std::size_t want = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (r.report.sweep[i].loss.total < r.report.sweep[want].loss.total) want = i;
  CHECK(r.report.chosen_index == want);
  CHECK(r.report.chosen_split_count == r.report.sweep[want].split_count);
  CHECK(r.report.sweep[0].box_count == 1);
}

TEST_CASE("run writes outputs") {
  RunConfig c = quick_config("run_out");
  RunReport rep = run(c);
  CHECK(fs::exists(c.out / "deformed.obj"));
  CHECK(slurp(c.out / "report.json") == rep.to_json());
  std::string trace = slurp(c.out / "trace.csv");
  CHECK(trace.rfind("split_count,generation,evaluations,best_fitness,mean_fitness,sigma\n", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(c.out / "timing.json")).contains("wall_seconds"));
  for (int k = 0; k < 3; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.obj", k);
    CHECK(fs::exists(c.out / "frames" / name));
  }
  Mesh back = load_obj(c.out / "deformed.obj");
  CHECK(back.faces == load_obj(c.mesh).faces);
}

TEST_CASE("failures name their stage") {
  auto stage_of = [](const RunConfig& c) -> std::pair<std::string, ErrorCode> {
    try {
      run(c);
    } catch (const StageError& e) {
      return {e.stage(), e.code()};
    }
    return {"", ErrorCode::kInternal};
  };
  RunConfig c = quick_config("stages");
  c.mesh = c.mesh.parent_path() / "missing.obj";
  CHECK(stage_of(c).first == "config");

  c = quick_config("stages");
  {
    std::ofstream out(c.mesh);
    out << "v 0 0 0\nv 1 0 0\nf 1 2 3\n";
  }
  auto [stage, code] = stage_of(c);
  CHECK(stage == "load");
  CHECK(code == ErrorCode::kParse);

  c = quick_config("stages_scorer");
  c.target_masks = {c.mesh.parent_path() / "none.pbm", c.mesh.parent_path() / "none2.pbm"};
  CHECK(stage_of(c).first == "config");
  Mask tiny{8, 8, std::vector<std::uint8_t>(64, 1)};
  write_pbm(tiny, c.target_masks[0]);
  write_pbm(tiny, c.target_masks[1]);
  auto wrong_size = stage_of(c);
  CHECK(wrong_size.first == "scorer");
  CHECK(wrong_size.second == ErrorCode::kInvalidArgument);

  c = quick_config("stages_remote");
  c.scorer = "remote";
  c.command = "exit 3";
  c.retries = 0;
  auto remote = stage_of(c);
  CHECK(remote.first == "optimize");
  CHECK(remote.second == ErrorCode::kScorer);
}

TEST_CASE("write failures clean up partial outputs") {
  RunConfig c = quick_config("write_fail");
  c.steps = 3;
  fs::create_directories(c.out);
  // A directory where a frame file should go makes the last write fail.
  fs::create_directories(c.out / "frames" / "frame_002.obj");
  try {
    run(c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "write");
    CHECK(e.code() == ErrorCode::kIo);
  }
  CHECK_FALSE(fs::exists(c.out / "deformed.obj"));
  CHECK_FALSE(fs::exists(c.out / "report.json"));
  CHECK_FALSE(fs::exists(c.out / "frames" / "frame_000.obj"));
}
