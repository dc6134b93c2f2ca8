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

// Box deformation graph: part boxes as nodes, mesh-edge adjacency as
// edges, a spanning tree along which box placement is propagated, and the
// frozen correspondences that keep neighbouring parts attached.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxdeform/box_split.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

struct TreeNode {
  std::vector<int> boxes;  // sorted; more than one for merged parents
  int parent = -1;
  std::vector<int> children;
  int depth = 0;
  // Set for the virtual edge joining a disconnected component to the root.
  bool unconstrained = false;
};

// Nodes are stored in execution order: every parent precedes its children.
struct BoxTree {
  std::vector<TreeNode> nodes;
  std::vector<int> node_of_box;
  int root = 0;
};

// Closest pair between the parent node's sampled box surfaces and the
// child node's box-face centres, frozen on the rest shape.
struct TreeEdgeConstraint {
  int parent_box = -1;
  int child_box = -1;
  Vec3 parent_point = Vec3::Zero();
  Vec3 child_point = Vec3::Zero();
  Vec3 rest_offset = Vec3::Zero();  // parent_point - child_point
};

struct VertexLink {
  int vertex = -1;  // vertex of the moved box
  int anchor = -1;  // its nearest vertex in the other box
  Vec3 rest_field = Vec3::Zero();  // anchor - vertex on the rest shape
  double weight = 0.5;
};

// One direction of a graph edge: vertices of `moved_box` follow their
// anchors in `anchor_box`.
struct GraphEdgeConstraint {
  int anchor_box = -1;
  int moved_box = -1;
  std::vector<VertexLink> links;
};

struct ConstraintSet {
  // Indexed by tree node; empty for the root and unconstrained nodes.
  std::vector<std::optional<TreeEdgeConstraint>> tree;
  std::vector<GraphEdgeConstraint> graph;
  double epsilon = 0.0;
};

struct ConstraintOptions {
  int samples_per_side = 8;
  double epsilon_fraction = 0.05;  // of the mesh AABB diagonal
};

struct BoxDefGraph {
  std::vector<PartBox> boxes;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
  std::vector<int> owner;                  // box index per vertex
  BoxTree tree;
  ConstraintSet constraints;

  std::size_t box_count() const { return boxes.size(); }
  std::vector<std::vector<int>> adjacency() const;
};

// Nodes and edges only. Throws InvalidArgument unless the boxes partition
// the mesh vertices.
BoxDefGraph build_graph(const Mesh& mesh, std::vector<PartBox> boxes);

BoxTree build_tree(const BoxDefGraph& graph);

ConstraintSet precompute_constraints(const Mesh& mesh,
                                     const BoxDefGraph& graph,
                                     const ConstraintOptions& options = {});

// build_graph + build_tree + precompute_constraints.
BoxDefGraph make_def_graph(const Mesh& mesh, std::vector<PartBox> boxes,
                           const ConstraintOptions& options = {});

// 6 * n * n equally spaced points (corners and edges included) on the
// faces of `box`.
std::vector<Vec3> sample_box_surface(const Bounds& box, int samples_per_side);
std::vector<Vec3> box_face_centers(const Bounds& box);

struct DeformParams {
  std::vector<Vec3> scales;

  static DeformParams identity(std::size_t boxes) {
    return {std::vector<Vec3>(boxes, Vec3::Ones())};
  }
};

// Affine map of one box after tree traversal: x -> s * (x - c) + c + t,
// evaluated as a displacement so unit scales reproduce x bit-exactly.
struct BoxTransform {
  Vec3 center = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Vec3 translation = Vec3::Zero();
  Vec3 scaling_offset(const Vec3& x) const {
    return (scale - Vec3::Ones()).cwiseProduct(x - center);
  }
  Vec3 displacement(const Vec3& x) const {
    return scaling_offset(x) + translation;
  }
  Vec3 apply(const Vec3& x) const { return x + displacement(x); }
};

struct DeformOptions {
  bool graph_edges = true;
};

struct DeformTrace {
  std::vector<BoxTransform> transforms;  // per box
  std::vector<Vec3> after_tree;          // positions before graph-edge ops
  struct Correction {
    int vertex;
    Vec3 delta;         // w * (F_def - F_rest)
    Vec3 field_change;  // F_def - F_rest
  };
  std::vector<Correction> corrections;
};

// Scales every box about its centre root-to-leaf, translates child nodes
// so the frozen tree-edge offsets are restored, then applies all
// graph-edge corrections from one snapshot. Topology and attributes are
// copied unchanged.
Mesh deform(const Mesh& mesh, const BoxDefGraph& graph,
            const DeformParams& params, const DeformOptions& options = {},
            DeformTrace* trace = nullptr);

// {"nodes":[{min,max,volume}],"edges":[[i,j]],"tree":[{boxes,parent}]}
std::string graph_to_json(const BoxDefGraph& graph);

}  // namespace boxdeform
