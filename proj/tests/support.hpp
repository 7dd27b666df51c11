#pragma once

// Shared fixtures for the test binaries: temp dirs, small scenes, a GLB
// writer and brute-force reference implementations.

#include "marisim/scene.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using marisim::TriangleMesh;
using marisim::Vec3;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "marisim-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void writeText(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string readText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Square in the plane z = z0 centered on the z axis.
inline TriangleMesh squareAtZ(double z0, double half, int object_id = 0) {
  TriangleMesh m;
  m.object_id = object_id;
  m.vertices = {{-half, -half, z0}, {half, -half, z0}, {half, half, z0}, {-half, half, z0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Square in the plane x = x0, spanning y and z in [-half, half].
inline TriangleMesh wallAtX(double x0, double half, int object_id = 0) {
  TriangleMesh m;
  m.object_id = object_id;
  m.vertices = {{x0, -half, -half}, {x0, half, -half}, {x0, half, half}, {x0, -half, half}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

inline TriangleMesh cube(const Vec3& center, double size, int object_id = 0) {
  TriangleMesh m;
  m.object_id = object_id;
  const double h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(center + Vec3((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h));
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline std::string cubeObj() {
  return "# unit cube\n"
         "o cube\n"
         "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nv 0 0 1\nv 1 0 1\nv 0 1 1\nv 1 1 1\n"
         "f 1 3 2\nf 2 3 4\nf 5 6 7\nf 6 8 7\nf 1 2 5\nf 2 6 5\n"
         "f 3 7 4\nf 4 7 8\nf 1 5 3\nf 3 5 7\nf 2 4 6\nf 4 8 6\n";
}

// Random triangles in a box, sized so rays hit a fair share of them.
inline TriangleMesh triangleSoup(int count, std::uint32_t seed, double extent = 5.0, double size = 1.5) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> off(-size, size);
  TriangleMesh m;
  for (int t = 0; t < count; ++t) {
    const Vec3 c(pos(gen), pos(gen), pos(gen));
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    for (int k = 0; k < 3; ++k) m.vertices.push_back(c + Vec3(off(gen), off(gen), off(gen)));
    m.triangles.push_back({base, base + 1, base + 2});
  }
  return m;
}

struct GlbMesh {
  std::vector<float> positions;  // xyz triples
  std::vector<std::uint32_t> indices;
  std::vector<double> translation;  // optional node translation
  std::string name = "mesh";
};

// Minimal binary glTF: one buffer, one node per mesh, uint32 or uint16 indices.
inline std::vector<std::uint8_t> makeGlb(const std::vector<GlbMesh>& meshes, bool uint16_indices = false) {
  using nlohmann::json;
  std::vector<std::uint8_t> bin;
  auto append = [&bin](const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bin.insert(bin.end(), p, p + n);
    while (bin.size() % 4) bin.push_back(0);
  };
  json doc = {{"asset", {{"version", "2.0"}}}, {"scene", 0}};
  json nodes = json::array(), gl_meshes = json::array(), accessors = json::array(), views = json::array();
  json scene_nodes = json::array();
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const GlbMesh& mesh = meshes[m];
    const std::size_t pos_offset = bin.size();
    append(mesh.positions.data(), mesh.positions.size() * sizeof(float));
    views.push_back({{"buffer", 0}, {"byteOffset", pos_offset}, {"byteLength", mesh.positions.size() * sizeof(float)}});
    accessors.push_back({{"bufferView", views.size() - 1},
                         {"componentType", 5126},
                         {"count", mesh.positions.size() / 3},
                         {"type", "VEC3"}});
    const std::size_t pos_accessor = accessors.size() - 1;

    const std::size_t idx_offset = bin.size();
    std::size_t idx_bytes = 0;
    if (uint16_indices) {
      std::vector<std::uint16_t> small(mesh.indices.begin(), mesh.indices.end());
      idx_bytes = small.size() * 2;
      append(small.data(), idx_bytes);
    } else {
      idx_bytes = mesh.indices.size() * 4;
      append(mesh.indices.data(), idx_bytes);
    }
    views.push_back({{"buffer", 0}, {"byteOffset", idx_offset}, {"byteLength", idx_bytes}});
    accessors.push_back({{"bufferView", views.size() - 1},
                         {"componentType", uint16_indices ? 5123 : 5125},
                         {"count", mesh.indices.size()},
                         {"type", "SCALAR"}});
    gl_meshes.push_back(
        {{"primitives", json::array({{{"attributes", {{"POSITION", pos_accessor}}}, {"indices", accessors.size() - 1}, {"mode", 4}}})}});
    json node = {{"mesh", m}, {"name", mesh.name}};
    if (!mesh.translation.empty()) node["translation"] = mesh.translation;
    nodes.push_back(node);
    scene_nodes.push_back(m);
  }
  doc["nodes"] = nodes;
  doc["meshes"] = gl_meshes;
  doc["accessors"] = accessors;
  doc["bufferViews"] = views;
  doc["buffers"] = json::array({{{"byteLength", bin.size()}}});
  doc["scenes"] = json::array({{{"nodes", scene_nodes}}});

  std::string text = doc.dump();
  while (text.size() % 4) text.push_back(' ');
  std::vector<std::uint8_t> out;
  auto u32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  const std::uint32_t total = 12 + 8 + static_cast<std::uint32_t>(text.size()) + 8 + static_cast<std::uint32_t>(bin.size());
  u32(0x46546C67);  // "glTF"
  u32(2);
  u32(total);
  u32(static_cast<std::uint32_t>(text.size()));
  u32(0x4E4F534A);  // "JSON"
  out.insert(out.end(), text.begin(), text.end());
  u32(static_cast<std::uint32_t>(bin.size()));
  u32(0x004E4942);  // "BIN\0"
  out.insert(out.end(), bin.begin(), bin.end());
  return out;
}

inline void writeBinary(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Reference ray/triangle test, deliberately not Moller-Trumbore: intersect
// the supporting plane, then check the point against the three edge
// half-planes.
inline bool planeEdgeIntersect(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c,
                               double& t_out) {
  const Vec3 n = (b - a).cross(c - a);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-14 * n.norm()) return false;
  const double t = n.dot(a - o) / denom;
  if (!(t > 0.0)) return false;
  const Vec3 p = o + t * d;
  const double s0 = n.dot((b - a).cross(p - a));
  const double s1 = n.dot((c - b).cross(p - b));
  const double s2 = n.dot((a - c).cross(p - c));
  const bool inside = (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
  if (!inside) return false;
  t_out = t;
  return true;
}

inline std::vector<std::array<Vec3, 3>> trianglesOf(const TriangleMesh& m) {
  std::vector<std::array<Vec3, 3>> out;
  for (const auto& t : m.triangles) out.push_back({m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]});
  return out;
}

struct BruteHit {
  bool hit = false;
  double t = 0.0;
  std::size_t triangle = 0;
};

inline BruteHit bruteForceNearest(const std::vector<std::array<Vec3, 3>>& tris, const Vec3& o, const Vec3& d,
                                  double t_min, double t_max) {
  BruteHit best;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    double t = 0.0;
    if (planeEdgeIntersect(o, d, tris[i][0], tris[i][1], tris[i][2], t) && t >= t_min && t <= t_max) {
      if (!best.hit || t < best.t) best = {true, t, i};
    }
  }
  return best;
}

inline Vec3 randomUnit(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(gen), n(gen), n(gen));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

} // namespace testing
