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


#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "boxdeform/box_split.hpp"
#include "boxdeform/def_graph.hpp"
#include "boxdeform/error.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace boxdeform;

namespace {

// Unit cubes [0,1]^3 and [0,1]^2 x [1,2], joined by one bridging face.
Mesh stacked_cubes() {
  Mesh m;
  fixtures::add_box(m, Vec3(0, 0, 0), Vec3(1, 1, 1));
  fixtures::add_box(m, Vec3(0, 0, 1), Vec3(1, 1, 2));
  m.faces.push_back({4, 5, 9});
  return m;
}

std::vector<PartBox> split_by(const Mesh& m, const std::vector<int>& owner, int count) {
  std::vector<std::vector<int>> lists(count);
  for (std::size_t v = 0; v < owner.size(); ++v) lists[owner[v]].push_back(static_cast<int>(v));
  std::vector<PartBox> boxes;
  for (auto& l : lists) boxes.push_back(PartBox::tight(m, l));
  return boxes;
}

std::vector<PartBox> stacked_boxes(const Mesh& m) {
  std::vector<int> owner(16, 0);
  std::fill(owner.begin() + 8, owner.end(), 1);
  return split_by(m, owner, 2);
}

BoxDefGraph synthetic(const std::vector<double>& volumes,
                      const std::vector<std::pair<int, int>>& edges) {
  BoxDefGraph g;
  for (double v : volumes) {
    PartBox b;
    b.bounds.min = Vec3::Zero();
    b.bounds.max = Vec3(v, 1, 1);
    g.boxes.push_back(b);
  }
  g.edges = edges;
  return g;
}

DeformParams random_params(std::size_t n, std::mt19937_64& rng, double lo = 1.0 / 3.0,
                           double hi = 3.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  DeformParams p;
  for (std::size_t i = 0; i < n; ++i)
    p.scales.push_back(Vec3(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))));
  return p;
}

double max_displacement(const Mesh& a, const Mesh& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.vertex_count(); ++i)
    worst = std::max(worst, (a.vertices[i] - b.vertices[i]).norm());
  return worst;
}

}  // namespace

TEST_CASE("build_graph edges") {
  SUBCASE("one box, no edges") {
    Mesh m = fixtures::cube();
    auto g = build_graph(m, split_by(m, std::vector<int>(8, 0), 1));
    CHECK(g.edges.empty());
  }
  SUBCASE("one bridging face gives one edge") {
    Mesh m = stacked_cubes();
    auto g = build_graph(m, stacked_boxes(m));
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}});
  }
  SUBCASE("airplane: body joins each wing, wings do not touch") {
    Mesh m = fixtures::airplane_cross();
    auto boxes = generate_boxes(m, voxelize(m, 32), 3);
    auto g = build_graph(m, boxes);
    int body = -1;
    for (int b = 0; b < 3; ++b)
      if (boxes[b].length(0) == 10.0) body = b;
    REQUIRE(body >= 0);
    // Brute-force edge enumeration from the owner map.
    std::set<std::pair<int, int>> want;
    for (const auto& f : m.faces)
      for (int k = 0; k < 3; ++k) {
        int a = g.owner[f[k]], b = g.owner[f[(k + 1) % 3]];
        if (a != b) want.emplace(std::min(a, b), std::max(a, b));
      }
    CHECK(g.edges == std::vector<std::pair<int, int>>(want.begin(), want.end()));
    CHECK(g.edges.size() == 2);
    for (auto [i, j] : g.edges) CHECK((i == body || j == body));
  }
  SUBCASE("ownership must partition the vertices") {
    Mesh m = stacked_cubes();
    auto boxes = stacked_boxes(m);
    boxes[1].vertices.push_back(0);
    CHECK_THROWS_AS(build_graph(m, boxes), InvalidArgument);
    boxes = stacked_boxes(m);
    boxes[1].vertices.pop_back();
    CHECK_THROWS_AS(build_graph(m, boxes), InvalidArgument);
    CHECK_THROWS_AS(build_graph(m, {}), InvalidArgument);
  }
}

TEST_CASE("build_tree") {
  SUBCASE("path A-B-C") {
    auto g = synthetic({5, 2, 1}, {{0, 1}, {1, 2}});
    auto t = build_tree(g);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].boxes == std::vector<int>{0});
    CHECK(t.nodes[1].boxes == std::vector<int>{1});
    CHECK(t.nodes[1].parent == 0);
    CHECK(t.nodes[2].boxes == std::vector<int>{2});
    CHECK(t.nodes[2].parent == 1);
    CHECK(t.nodes[2].depth == 2);
  }
  SUBCASE("root is the largest box, ties to the lowest index") {
    auto g = synthetic({1, 3, 3}, {{0, 1}, {1, 2}});
    CHECK(build_tree(g).nodes[0].boxes == std::vector<int>{1});
  }
  SUBCASE("diamond merges B and C") {
    auto g = synthetic({5, 2, 2, 1}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    auto t = build_tree(g);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[1].boxes == std::vector<int>{1, 2});
    CHECK(t.nodes[1].parent == 0);
    CHECK(t.nodes[2].boxes == std::vector<int>{3});
    CHECK(t.nodes[2].parent == 1);
    CHECK(t.nodes[0].children == std::vector<int>{1});
    CHECK(t.node_of_box == std::vector<int>{0, 1, 1, 2});
  }
  SUBCASE("single node") {
    auto t = build_tree(synthetic({1}, {}));
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].parent == -1);
  }
  SUBCASE("disconnected components hang off the root unconstrained") {
    auto t = build_tree(synthetic({5, 1, 3, 2}, {{0, 1}, {2, 3}}));
    REQUIRE(t.nodes.size() == 4);
    CHECK(t.nodes[2].boxes == std::vector<int>{2});
    CHECK(t.nodes[2].parent == 0);
    CHECK(t.nodes[2].unconstrained);
    CHECK_FALSE(t.nodes[3].unconstrained);
    CHECK(t.nodes[3].parent == 2);
  }
  SUBCASE("spanning, acyclic, parents precede children") {
    for (const auto& [name, mesh] : fixtures::identity_set()) {
      CAPTURE(name);
      auto g = build_graph(mesh, generate_boxes(mesh, voxelize(mesh, 16), 5));
      auto t = build_tree(g);
      std::vector<int> seen(g.box_count(), 0);
      int roots = 0;
      for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        for (int b : t.nodes[i].boxes) ++seen[b];
        if (t.nodes[i].parent < 0) ++roots;
        else CHECK(t.nodes[i].parent < static_cast<int>(i));
      }
      CHECK(roots == 1);
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      // Tree edges are graph edges at box granularity.
      auto adj = g.adjacency();
      for (const auto& n : t.nodes) {
        if (n.parent < 0 || n.unconstrained) continue;
        bool linked = false;
        for (int b : n.boxes)
          for (int p : t.nodes[n.parent].boxes)
            linked |= std::binary_search(adj[b].begin(), adj[b].end(), p);
        CHECK(linked);
      }
    }
  }
}

TEST_CASE("surface samples") {
  Bounds b;
  b.min = Vec3(0, 0, 0);
  b.max = Vec3(1, 2, 3);
  auto s = sample_box_surface(b, 8);
  CHECK(s.size() == 384);
  for (const auto& p : s) {
    CHECK(b.contains(p, 1e-15));
    int on_face = 0;
    for (int a = 0; a < 3; ++a) on_face += p[a] == b.min[a] || p[a] == b.max[a];
    CHECK(on_face >= 1);
  }
  auto c = box_face_centers(b);
  CHECK(c.size() == 6);
  CHECK(c[5] == Vec3(0.5, 1, 3));
}

TEST_CASE("touching cubes: frozen tree pair") {
  Mesh m = stacked_cubes();
  SUBCASE("8x8 samples: pair on the shared plane, nearest off-centre sample") {
    auto g = make_def_graph(m, stacked_boxes(m));
    REQUIRE(g.constraints.tree[1].has_value());
    const auto& tc = *g.constraints.tree[1];
    CHECK(tc.parent_point.z() == 1.0);
    CHECK(tc.child_point == Vec3(0.5, 0.5, 1.0));
    // Brute force over 384 x 6 points.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : sample_box_surface(g.boxes[0].bounds, 8))
      for (const auto& q : box_face_centers(g.boxes[1].bounds)) best = std::min(best, (p - q).norm());
    CHECK(tc.rest_offset.norm() == doctest::Approx(best).epsilon(1e-15));
    CHECK(best == doctest::Approx(std::sqrt(2.0) / 14.0));
  }
  SUBCASE("9x9 samples hit the face centre: zero offset") {
    auto g = make_def_graph(m, stacked_boxes(m), {9, 0.05});
    CHECK(g.constraints.tree[1]->rest_offset.norm() == 0.0);
  }
}

TEST_CASE("graph-edge weights") {
  Mesh m = stacked_cubes();
  auto g = make_def_graph(m, stacked_boxes(m));
  CHECK(g.constraints.epsilon == doctest::Approx(0.05 * std::sqrt(6.0)));
  REQUIRE(g.constraints.graph.size() == 2);
  for (const auto& gc : g.constraints.graph)
    for (const auto& l : gc.links) {
      CHECK(l.weight > 0.0);
      CHECK(l.weight <= 0.5);
      CHECK(l.rest_field == m.vertices[l.anchor] - m.vertices[l.vertex]);
      double d = l.rest_field.norm();
      if (d == 0.0) CHECK(l.weight == 0.5);
      else CHECK(l.weight == doctest::Approx(0.5 * std::min(1.0, g.constraints.epsilon / d)));
      // Nearest vertex among the anchor box.
      for (int a : g.boxes[gc.anchor_box].vertices)
        CHECK((m.vertices[a] - m.vertices[l.vertex]).norm() >= d);
    }
}

TEST_CASE("epsilon scales with the mesh, weights do not") {
  Mesh m = fixtures::airplane_cross();
  auto boxes = generate_boxes(m, voxelize(m, 32), 3);
  auto g1 = make_def_graph(m, boxes);
  Mesh big = fixtures::transformed(m, 2.0 * Eigen::Matrix3d::Identity(), Vec3::Zero());
  std::vector<PartBox> big_boxes;
  for (const auto& b : boxes) big_boxes.push_back(PartBox::tight(big, b.vertices));
  auto g2 = make_def_graph(big, big_boxes);
  CHECK(g2.constraints.epsilon == doctest::Approx(2.0 * g1.constraints.epsilon));
  REQUIRE(g1.constraints.graph.size() == g2.constraints.graph.size());
  for (std::size_t e = 0; e < g1.constraints.graph.size(); ++e)
    for (std::size_t i = 0; i < g1.constraints.graph[e].links.size(); ++i)
      CHECK(g2.constraints.graph[e].links[i].weight ==
            doctest::Approx(g1.constraints.graph[e].links[i].weight).epsilon(1e-12));
}

TEST_CASE("deform: identity is exact") {
  for (const auto& [name, mesh] : fixtures::identity_set()) {
    CAPTURE(name);
    for (int k : {1, 2, 3, 4}) {
      auto g = make_def_graph(mesh, generate_boxes(mesh, voxelize(mesh, 16), k));
      Mesh out = deform(mesh, g, DeformParams::identity(g.box_count()));
      CHECK(max_displacement(mesh, out) <= 1e-9);
      CHECK(out.vertices == mesh.vertices);
      CHECK(out.faces == mesh.faces);
    }
  }
}

TEST_CASE("deform: single box scale (2,1,1)") {
  Mesh m = fixtures::icosphere(2);
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, 16), 1));
  Mesh out = deform(m, g, {{Vec3(2, 1, 1)}});
  Vec3 c = m.bounds().center();
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    CHECK(out.vertices[i].x() - c.x() == doctest::Approx(2.0 * (m.vertices[i].x() - c.x())));
    CHECK(out.vertices[i].y() == m.vertices[i].y());
    CHECK(out.vertices[i].z() == m.vertices[i].z());
  }
}

TEST_CASE("deform: stacked cubes, bottom squashed") {
  Mesh m = stacked_cubes();
  auto g = make_def_graph(m, stacked_boxes(m));
  DeformParams p{{Vec3(1, 1, 0.5), Vec3(1, 1, 1)}};
  DeformTrace trace;
  Mesh tree_only = deform(m, g, p, {false}, &trace);
  for (int v = 8; v < 16; ++v)
    CHECK((tree_only.vertices[v] - (m.vertices[v] - Vec3(0, 0, 0.25))).norm() <= 1e-12);
  const auto& tc = *g.constraints.tree[1];
  Vec3 r_def = trace.transforms[0].apply(tc.parent_point) - trace.transforms[1].apply(tc.child_point);
  CHECK((r_def - tc.rest_offset).norm() <= 1e-6);
  // Graph edges only nudge: the top stays put because the bridge field is
  // already restored.
  Mesh full = deform(m, g, p);
  CHECK(full.faces == m.faces);
}

TEST_CASE("deform: phase-1 exactness over random draws") {
  Mesh m = fixtures::dumbbell();
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, fixtures::kDumbbellResolution), 2));
  std::mt19937_64 rng(42);
  for (int draw = 0; draw < 100; ++draw) {
    DeformTrace trace;
    deform(m, g, random_params(g.box_count(), rng), {false}, &trace);
    for (std::size_t id = 0; id < g.tree.nodes.size(); ++id) {
      const auto& tc = g.constraints.tree[id];
      if (!tc) continue;
      Vec3 r = trace.transforms[tc->parent_box].apply(tc->parent_point) -
               trace.transforms[tc->child_box].apply(tc->child_point);
      CHECK((r - tc->rest_offset).norm() <= 1e-6);
    }
  }
}

TEST_CASE("deform: graph-edge corrections are bounded") {
  Mesh m = fixtures::table();
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, 24), 4));
  std::mt19937_64 rng(9);
  for (int draw = 0; draw < 20; ++draw) {
    DeformTrace trace;
    deform(m, g, random_params(g.box_count(), rng), {}, &trace);
    CHECK_FALSE(trace.corrections.empty());
    for (const auto& c : trace.corrections)
      CHECK(c.delta.norm() <= 0.5 * c.field_change.norm() * (1 + 1e-12));
  }
}

TEST_CASE("deform: translation equivariance") {
  Mesh m = fixtures::airplane_cross();
  auto boxes = generate_boxes(m, voxelize(m, 32), 3);
  auto g = make_def_graph(m, boxes);
  std::mt19937_64 rng(4);
  for (Vec3 t : {Vec3(3, -1, 2), Vec3(-100, 50, 7.5)}) {
    Mesh moved = fixtures::transformed(m, Eigen::Matrix3d::Identity(), t);
    std::vector<PartBox> mb;
    for (const auto& b : boxes) mb.push_back(PartBox::tight(moved, b.vertices));
    auto gm = make_def_graph(moved, mb);
    for (int draw = 0; draw < 10; ++draw) {
      auto p = random_params(g.box_count(), rng);
      Mesh a = deform(moved, gm, p);
      Mesh b = fixtures::transformed(deform(m, g, p), Eigen::Matrix3d::Identity(), t);
      CHECK(max_displacement(a, b) <= 1e-6);
    }
  }
}

TEST_CASE("deform: deterministic") {
  Mesh m = fixtures::table();
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, 24), 4));
  std::mt19937_64 rng(1);
  auto p = random_params(g.box_count(), rng);
  CHECK(deform(m, g, p).vertices == deform(m, g, p).vertices);
}

TEST_CASE("deform: argument checks") {
  Mesh m = stacked_cubes();
  auto g = make_def_graph(m, stacked_boxes(m));
  CHECK_THROWS_AS(deform(m, g, DeformParams::identity(3)), InvalidArgument);
  CHECK_THROWS_AS(deform(m, g, {{Vec3(1, 1, 1), Vec3(1, 0, 1)}}), InvalidArgument);
  CHECK_THROWS_AS(deform(fixtures::cube(), g, DeformParams::identity(2)), InvalidArgument);
}

TEST_CASE("unconstrained components keep their place") {
  Mesh m;
  fixtures::add_box(m, Vec3(0, 0, 0), Vec3(2, 2, 2));
  fixtures::add_box(m, Vec3(5, 0, 0), Vec3(6, 1, 1));
  std::vector<int> owner(16, 0);
  std::fill(owner.begin() + 8, owner.end(), 1);
  auto g = make_def_graph(m, split_by(m, owner, 2));
  REQUIRE(g.tree.nodes.size() == 2);
  CHECK(g.tree.nodes[1].unconstrained);
  CHECK_FALSE(g.constraints.tree[1].has_value());
  Mesh out = deform(m, g, {{Vec3(2, 2, 2), Vec3(1, 1, 1)}});
  for (int v = 8; v < 16; ++v) CHECK(out.vertices[v] == m.vertices[v]);
}

TEST_CASE("graph_to_json") {
  Mesh m = fixtures::airplane_cross();
  auto g = make_def_graph(m, generate_boxes(m, voxelize(m, 32), 3));
  auto j = nlohmann::json::parse(graph_to_json(g));
  CHECK(j["nodes"].size() == 3);
  CHECK(j["edges"].size() == 2);
  CHECK(j["tree"][0]["parent"] == -1);
  CHECK(j["nodes"][0]["volume"].get<double>() == doctest::Approx(g.boxes[0].bounds.volume()));
}
