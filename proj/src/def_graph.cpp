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

#include "boxdeform/def_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "boxdeform/error.hpp"

namespace boxdeform {

namespace {

// Relative tolerance on squared distances (times diagonal^2) below which
// candidates count as equidistant.
constexpr double kTieTolerance = 1e-9;

int largest_box(const std::vector<PartBox>& boxes,
                const std::vector<bool>& taken) {
  int best = -1;
  for (int b = 0; b < static_cast<int>(boxes.size()); ++b) {
    if (taken[b]) continue;
    if (best < 0 || boxes[b].bounds.volume() >
                        boxes[best].bounds.volume() * (1.0 + kTieTolerance))
      best = b;
  }
  return best;
}

// Exact nearest neighbour over a fixed point set; ties go to the lower
// vertex index.
// Nearest candidate vertex; distances within `tie` of the minimum count as
// equal and go to the lowest vertex index, so the choice survives rounding
// noise from rigid motions of the mesh.
class NearestVertex {
 public:
  NearestVertex(const Mesh& mesh, const std::vector<int>& candidates, double tie)
      : mesh_(mesh), sorted_(candidates), tie_(tie) {
    std::sort(sorted_.begin(), sorted_.end(), [&](int a, int b) {
      double xa = mesh_.vertices[a].x(), xb = mesh_.vertices[b].x();
      return xa != xb ? xa < xb : a < b;
    });
    xs_.reserve(sorted_.size());
    for (int v : sorted_) xs_.push_back(mesh_.vertices[v].x());
  }

  int query(const Vec3& p) const {
    double min_d2 = std::numeric_limits<double>::infinity();
    scan(p, 0.0, [&](int, double d2) { min_d2 = std::min(min_d2, d2); });
    int best = -1;
    scan(p, tie_, [&](int v, double d2) {
      if (d2 <= min_d2 + tie_ && (best < 0 || v < best)) best = v;
    });
    return best;
  }

 private:
  template <typename F>
  void scan(const Vec3& p, double slack, F&& visit) const {
    const auto start = std::lower_bound(xs_.begin(), xs_.end(), p.x()) - xs_.begin();
    const auto n = static_cast<std::ptrdiff_t>(sorted_.size());
    double bound = std::numeric_limits<double>::infinity();
    auto consider = [&](std::ptrdiff_t i) {
      int v = sorted_[static_cast<std::size_t>(i)];
      double d2 = (mesh_.vertices[v] - p).squaredNorm();
      bound = std::min(bound, d2);
      visit(v, d2);
    };
    for (std::ptrdiff_t i = start; i < n; ++i) {
      double dx = xs_[static_cast<std::size_t>(i)] - p.x();
      if (dx * dx > bound + slack) break;
      consider(i);
    }
    for (std::ptrdiff_t i = start - 1; i >= 0; --i) {
      double dx = p.x() - xs_[static_cast<std::size_t>(i)];
      if (dx * dx > bound + slack) break;
      consider(i);
    }
  }

  const Mesh& mesh_;
  std::vector<int> sorted_;
  std::vector<double> xs_;
  double tie_;
};

}  // namespace

std::vector<std::vector<int>> BoxDefGraph::adjacency() const {
  std::vector<std::vector<int>> adj(boxes.size());
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

BoxDefGraph build_graph(const Mesh& mesh, std::vector<PartBox> boxes) {
  if (boxes.empty()) throw InvalidArgument("no boxes");
  BoxDefGraph g;
  g.owner.assign(mesh.vertices.size(), -1);
  for (int b = 0; b < static_cast<int>(boxes.size()); ++b) {
    for (int v : boxes[b].vertices) {
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
        throw InvalidArgument("box " + std::to_string(b) +
                              " owns a vertex outside the mesh");
      if (g.owner[v] != -1)
        throw InvalidArgument("vertex " + std::to_string(v) +
                              " owned by more than one box");
      g.owner[v] = b;
    }
  }
  for (std::size_t v = 0; v < g.owner.size(); ++v)
    if (g.owner[v] == -1)
      throw InvalidArgument("vertex " + std::to_string(v) +
                            " not owned by any box");

  std::set<std::pair<int, int>> edges;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = g.owner[f[k]], b = g.owner[f[(k + 1) % 3]];
      if (a != b) edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  g.boxes = std::move(boxes);
  return g;
}

BoxTree build_tree(const BoxDefGraph& graph) {
  const int n = static_cast<int>(graph.boxes.size());
  const auto adj = graph.adjacency();
  std::vector<bool> discovered(n, false);
  std::vector<TreeNode> nodes;
  std::vector<bool> dead;

  auto bfs = [&](int start_box, int parent, bool unconstrained) {
    discovered[start_box] = true;
    TreeNode root_node;
    root_node.boxes = {start_box};
    root_node.parent = parent;
    root_node.depth = parent < 0 ? 0 : nodes[parent].depth + 1;
    root_node.unconstrained = unconstrained;
    nodes.push_back(root_node);
    dead.push_back(false);
    int root_id = static_cast<int>(nodes.size()) - 1;
    if (parent >= 0) nodes[parent].children.push_back(root_id);

    std::vector<int> frontier{root_id};
    while (!frontier.empty()) {
      // Frontier nodes adjacent to each undiscovered box.
      std::vector<std::vector<int>> touching(n);
      for (int node : frontier)
        for (int b : nodes[node].boxes)
          for (int u : adj[b])
            if (!discovered[u]) touching[u].push_back(node);
      for (auto& t : touching) {
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
      }

      // Union frontier nodes that share a child; the lowest id survives.
      std::vector<int> rep(nodes.size());
      std::iota(rep.begin(), rep.end(), 0);
      std::function<int(int)> find = [&](int x) {
        return rep[x] == x ? x : rep[x] = find(rep[x]);
      };
      for (int u = 0; u < n; ++u) {
        for (std::size_t k = 1; k < touching[u].size(); ++k) {
          int a = find(touching[u][0]), b = find(touching[u][k]);
          if (a != b) rep[std::max(a, b)] = std::min(a, b);
        }
      }
      for (int node : frontier) {
        int r = find(node);
        if (r == node) continue;
        auto& keep = nodes[r];
        keep.boxes.insert(keep.boxes.end(), nodes[node].boxes.begin(),
                          nodes[node].boxes.end());
        std::sort(keep.boxes.begin(), keep.boxes.end());
        if (nodes[node].parent >= 0) {
          auto& siblings = nodes[nodes[node].parent].children;
          siblings.erase(std::remove(siblings.begin(), siblings.end(), node),
                         siblings.end());
        }
        dead[node] = true;
      }

      std::vector<int> next;
      for (int u = 0; u < n; ++u) {
        if (touching[u].empty()) continue;
        int p = find(touching[u][0]);
        TreeNode child;
        child.boxes = {u};
        child.parent = p;
        child.depth = nodes[p].depth + 1;
        nodes.push_back(child);
        dead.push_back(false);
        int id = static_cast<int>(nodes.size()) - 1;
        nodes[p].children.push_back(id);
        discovered[u] = true;
        next.push_back(id);
      }
      frontier = std::move(next);
    }
    return root_id;
  };

  int root_box = largest_box(graph.boxes, discovered);
  bfs(root_box, -1, false);
  while (true) {
    int b = largest_box(graph.boxes, discovered);
    if (b < 0) break;
    bfs(b, 0, true);
  }

  // Compact away merged-out nodes, keeping creation order.
  std::vector<int> remap(nodes.size(), -1);
  BoxTree tree;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (dead[i]) continue;
    remap[i] = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(nodes[i]);
  }
  tree.node_of_box.assign(n, -1);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    auto& node = tree.nodes[i];
    if (node.parent >= 0) node.parent = remap[node.parent];
    for (auto& c : node.children) c = remap[c];
    for (int b : node.boxes) tree.node_of_box[b] = static_cast<int>(i);
  }
  tree.root = 0;
  return tree;
}

std::vector<Vec3> sample_box_surface(const Bounds& box, int samples_per_side) {
  const int k = std::max(1, samples_per_side);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(6 * k * k));
  auto t_of = [k](int i) { return k == 1 ? 0.5 : static_cast<double>(i) / (k - 1); };
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          Vec3 p;
          p[axis] = side == 0 ? box.min[axis] : box.max[axis];
          p[u] = box.min[u] + t_of(i) * (box.max[u] - box.min[u]);
          p[v] = box.min[v] + t_of(j) * (box.max[v] - box.min[v]);
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

std::vector<Vec3> box_face_centers(const Bounds& box) {
  std::vector<Vec3> out;
  const Vec3 c = box.center();
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Vec3 p = c;
      p[axis] = side == 0 ? box.min[axis] : box.max[axis];
      out.push_back(p);
    }
  }
  return out;
}

ConstraintSet precompute_constraints(const Mesh& mesh,
                                     const BoxDefGraph& graph,
                                     const ConstraintOptions& options) {
  ConstraintSet cs;
  const auto& tree = graph.tree;
  const double diagonal = mesh.bounds().diagonal();
  const double tie = kTieTolerance * diagonal * diagonal;
  cs.tree.resize(tree.nodes.size());
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& node = tree.nodes[id];
    if (node.parent < 0 || node.unconstrained) continue;
    const auto& parent = tree.nodes[node.parent];
    struct Pair {
      int pb, cb;
      Vec3 ps, pc;
      double d2;
    };
    std::vector<Pair> pairs;
    double min_d2 = std::numeric_limits<double>::infinity();
    for (int pb : parent.boxes) {
      auto samples = sample_box_surface(graph.boxes[pb].bounds,
                                        options.samples_per_side);
      for (int cb : node.boxes) {
        auto centers = box_face_centers(graph.boxes[cb].bounds);
        for (const auto& ps : samples) {
          for (const auto& pc : centers) {
            double d2 = (ps - pc).squaredNorm();
            min_d2 = std::min(min_d2, d2);
            pairs.push_back({pb, cb, ps, pc, d2});
          }
        }
      }
    }
    // First pair in enumeration order within the tie tolerance.
    TreeEdgeConstraint best;
    for (const auto& pr : pairs) {
      if (pr.d2 <= min_d2 + tie) {
        best.parent_box = pr.pb;
        best.child_box = pr.cb;
        best.parent_point = pr.ps;
        best.child_point = pr.pc;
        break;
      }
    }
    best.rest_offset = best.parent_point - best.child_point;
    cs.tree[id] = best;
  }

  cs.epsilon = options.epsilon_fraction * diagonal;
  for (auto [i, j] : graph.edges) {
    for (auto [anchor, moved] : {std::pair{i, j}, std::pair{j, i}}) {
      GraphEdgeConstraint gc;
      gc.anchor_box = anchor;
      gc.moved_box = moved;
      NearestVertex nn(mesh, graph.boxes[anchor].vertices, tie);
      for (int v : graph.boxes[moved].vertices) {
        VertexLink link;
        link.vertex = v;
        link.anchor = nn.query(mesh.vertices[v]);
        link.rest_field = mesh.vertices[link.anchor] - mesh.vertices[v];
        double len = link.rest_field.norm();
        // min(1, eps / 0) is taken as 1.
        link.weight = len > 0.0 ? 0.5 * std::min(1.0, cs.epsilon / len) : 0.5;
        gc.links.push_back(link);
      }
      cs.graph.push_back(std::move(gc));
    }
  }
  return cs;
}

BoxDefGraph make_def_graph(const Mesh& mesh, std::vector<PartBox> boxes,
                           const ConstraintOptions& options) {
  auto graph = build_graph(mesh, std::move(boxes));
  graph.tree = build_tree(graph);
  graph.constraints = precompute_constraints(mesh, graph, options);
  return graph;
}

Mesh deform(const Mesh& mesh, const BoxDefGraph& graph,
            const DeformParams& params, const DeformOptions& options,
            DeformTrace* trace) {
  const std::size_t nb = graph.boxes.size();
  if (params.scales.size() != nb)
    throw InvalidArgument("expected " + std::to_string(nb) +
                          " scale vectors, got " +
                          std::to_string(params.scales.size()));
  for (const auto& s : params.scales)
    if (!s.allFinite() || (s.array() <= 0.0).any())
      throw InvalidArgument("scales must be positive and finite");
  if (graph.owner.size() != mesh.vertices.size() ||
      graph.constraints.tree.size() != graph.tree.nodes.size())
    throw InvalidArgument("graph was built for a different mesh");

  std::vector<BoxTransform> xf(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    xf[b].center = graph.boxes[b].bounds.center();
    xf[b].scale = params.scales[b];
  }

  // Root-to-leaf: node translation from the parent's placed geometry.
  const auto& nodes = graph.tree.nodes;
  std::vector<Vec3> node_t(nodes.size(), Vec3::Zero());
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    if (node.parent >= 0) {
      const auto& tc = graph.constraints.tree[id];
      if (tc) {
        // Child translation t solves P(p_parent) - (S(p_child) + t) = r_rest,
        // written with displacements so identity scales give t == 0 exactly.
        node_t[id] = xf[tc->parent_box].displacement(tc->parent_point) -
                     xf[tc->child_box].scaling_offset(tc->child_point);
      } else {
        node_t[id] = node_t[node.parent];
      }
    }
    for (int b : node.boxes) xf[b].translation = node_t[id];
  }

  Mesh out = mesh;
  for (std::size_t b = 0; b < nb; ++b)
    for (int v : graph.boxes[b].vertices)
      out.vertices[v] = xf[b].apply(mesh.vertices[v]);

  if (trace) {
    trace->transforms = xf;
    trace->after_tree = out.vertices;
    trace->corrections.clear();
  }

  if (options.graph_edges && !graph.constraints.graph.empty()) {
    const std::vector<Vec3> snapshot = out.vertices;
    std::vector<Vec3> acc(snapshot.size(), Vec3::Zero());
    for (const auto& gc : graph.constraints.graph) {
      for (const auto& link : gc.links) {
        Vec3 change = (snapshot[link.anchor] - snapshot[link.vertex]) - link.rest_field;
        Vec3 delta = link.weight * change;
        acc[link.vertex] += delta;
        if (trace) trace->corrections.push_back({link.vertex, delta, change});
      }
    }
    for (std::size_t v = 0; v < acc.size(); ++v) out.vertices[v] += acc[v];
  }
  return out;
}

std::string graph_to_json(const BoxDefGraph& graph) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& b : graph.boxes) {
    nodes.push_back({{"min", {b.bounds.min.x(), b.bounds.min.y(), b.bounds.min.z()}},
                     {"max", {b.bounds.max.x(), b.bounds.max.y(), b.bounds.max.z()}},
                     {"volume", b.bounds.volume()},
                     {"vertex_count", b.vertices.size()}});
  }
  json edges = json::array();
  for (auto [i, j] : graph.edges) edges.push_back({i, j});
  json tree = json::array();
  for (const auto& n : graph.tree.nodes) {
    json entry = {{"boxes", n.boxes}, {"parent", n.parent}};
    if (n.unconstrained) entry["unconstrained"] = true;
    tree.push_back(std::move(entry));
  }
  return json{{"nodes", nodes}, {"edges", edges}, {"tree", tree}}.dump(2);
}

}  // namespace boxdeform
