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

#include "boxdeform/mesh.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "boxdeform/error.hpp"

namespace boxdeform {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  // from_chars rejects a leading '+', which some exporters emit.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line_no, "bad number '" + std::string(tok) + "'");
  return v;
}

int parse_index(std::string_view tok, std::size_t vertex_count,
                std::size_t line_no) {
  // "i", "i/t", "i//n", "i/t/n": only the position index matters.
  auto slash = tok.find('/');
  auto head = tok.substr(0, slash);
  long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0)
    throw ParseError(line_no, "bad face index '" + std::string(tok) + "'");
  long resolved = idx > 0 ? idx - 1 : static_cast<long>(vertex_count) + idx;
  if (resolved < 0 || resolved >= static_cast<long>(vertex_count))
    throw ParseError(line_no, "face index " + std::to_string(idx) +
                                  " out of range");
  return static_cast<int>(resolved);
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void Mesh::validate() const {
  if (vertices.size() < 3)
    throw TopologyError("mesh needs at least 3 vertices, has " +
                        std::to_string(vertices.size()));
  if (faces.empty()) throw TopologyError("mesh has no faces");
  const auto n = static_cast<int>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& t = faces[f];
    for (int k : t)
      if (k < 0 || k >= n)
        throw TopologyError("face " + std::to_string(f) +
                            " references vertex " + std::to_string(k));
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw TopologyError("face " + std::to_string(f) + " repeats a vertex");
  }
  for (const auto& [name, values] : attributes)
    if (values.size() % vertices.size() != 0)
      throw TopologyError("attribute '" + name +
                          "' is not a per-vertex array");
}

Mesh parse_obj(const std::string& text) {
  Mesh mesh;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw ParseError(line_no, "vertex needs 3 coords");
      mesh.vertices.emplace_back(parse_double(toks[1], line_no),
                                 parse_double(toks[2], line_no),
                                 parse_double(toks[3], line_no));
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw ParseError(line_no, "face needs 3 indices");
      std::vector<int> poly;
      for (std::size_t i = 1; i < toks.size(); ++i)
        poly.push_back(parse_index(toks[i], mesh.vertices.size(), line_no));
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        Face t{poly[0], poly[i], poly[i + 1]};
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
          throw ParseError(line_no, "degenerate face repeats a vertex");
        mesh.faces.push_back(t);
      }
    }
    // vt, vn, o, g, s, usemtl, mtllib and friends are ignored.
  }
  if (mesh.vertices.empty() || mesh.faces.empty())
    throw TopologyError("OBJ contains no triangles");
  mesh.validate();
  return mesh;
}

Mesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_obj(ss.str());
}

std::string format_obj(const Mesh& mesh) {
  mesh.validate();
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    append_number(out, v.x());
    out += ' ';
    append_number(out, v.y());
    out += ' ';
    append_number(out, v.z());
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) +
           ' ' + std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path) {
  auto text = format_obj(mesh);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Vec3> face_normals(const Mesh& mesh) {
  std::vector<Vec3> normals(mesh.faces.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                 .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    double len = n.norm();
    if (0.5 * len >= kDegenerateArea) normals[f] = n / len;
  }
  return normals;
}

std::vector<Vec3> vertex_normals(const Mesh& mesh) {
  auto fn = face_normals(mesh);
  std::vector<Vec3> sum(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (fn[f].isZero(0.0)) continue;
    for (int v : mesh.faces[f]) sum[v] += fn[f];
  }
  for (auto& n : sum) {
    double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  return sum;
}

void require_same_topology(const Mesh& a, const Mesh& b) {
  if (a.vertices.size() != b.vertices.size() || a.faces != b.faces)
    throw TopologyError("meshes do not share topology");
}

}  // namespace boxdeform
