#include "marisim/scene.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace marisim {

using nlohmann::json;

void Pose::validate() const {
  if (!position.allFinite()) throw ContractViolation("pose position is not finite");
  if (std::abs(orientation.norm() - 1.0) > 1e-9) {
    throw ContractViolation("pose orientation is not a unit quaternion (norm " + std::to_string(orientation.norm()) + ")");
  }
}

void Material::validate(const std::string& context) const {
  if (!(acoustic_reflectance >= 0.0 && acoustic_reflectance <= 1.0)) {
    throw ConfigError(context + ".acoustic_reflectance must be in [0,1]");
  }
  for (int c = 0; c < 3; ++c) {
    if (!(color[c] >= 0.0 && color[c] <= 1.0)) {
      throw ConfigError(context + ".color[" + std::to_string(c) + "] must be in [0,1]");
    }
  }
}

void TriangleMesh::validate() const {
  const std::string where = "object " + std::to_string(object_id);
  if (triangles.empty()) throw LoadError(where + ": mesh has no triangles");
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (!vertices[v].allFinite()) throw LoadError(where + ": vertex " + std::to_string(v) + " is not finite");
  }
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (std::uint32_t idx : triangles[t]) {
      if (idx >= vertices.size()) {
        throw LoadError(where + ": triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                        " but the mesh has " + std::to_string(vertices.size()) + " vertices");
      }
    }
  }
}

namespace {

Material parseMaterial(const json& j, Material base, const std::string& context) {
  if (j.contains("acoustic_reflectance")) base.acoustic_reflectance = j.at("acoustic_reflectance").get<double>();
  if (j.contains("color")) {
    const auto& c = j.at("color");
    if (!c.is_array() || c.size() != 3) throw ConfigError(context + ".color must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) base.color[i] = c[i].get<double>();
  }
  base.validate(context);
  return base;
}

} // namespace

MaterialTable MaterialTable::fromJsonText(const std::string& text) {
  MaterialTable table;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("material table: ") + e.what());
  }
  try {
    if (doc.contains("labels")) {
      for (const auto& [label, entry] : doc.at("labels").items()) {
        table.by_label[label] = parseMaterial(entry, Material{}, "labels." + label);
      }
    }
    if (doc.contains("objects")) {
      for (const auto& entry : doc.at("objects")) {
        if (!entry.contains("id")) throw ConfigError("objects[]: missing field \"id\"");
        const int id = entry.at("id").get<int>();
        const std::string context = "objects[id=" + std::to_string(id) + "]";
        Material base;
        bool assigned = false;
        if (entry.contains("label")) {
          const std::string label = entry.at("label").get<std::string>();
          table.labels[id] = label;
          if (auto it = table.by_label.find(label); it != table.by_label.end()) {
            base = it->second;
            assigned = true;
          }
        }
        if (entry.contains("acoustic_reflectance") || entry.contains("color")) {
          base = parseMaterial(entry, base, context);
          assigned = true;
        }
        if (assigned) table.objects[id] = base;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("material table: ") + e.what());
  }
  return table;
}

MaterialTable MaterialTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open material table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return fromJsonText(ss.str());
}

Scene::Scene(std::vector<TriangleMesh> meshes, const MaterialTable& materials) {
  auto geometry = std::make_shared<Geometry>();
  std::size_t dropped = 0;
  for (TriangleMesh& mesh : meshes) {
    mesh.validate();
    std::vector<std::array<std::uint32_t, 3>> kept;
    std::vector<Vec3> normals;
    kept.reserve(mesh.triangles.size());
    normals.reserve(mesh.triangles.size());
    for (const auto& tri : mesh.triangles) {
      const Vec3& a = mesh.vertices[tri[0]];
      const Vec3& b = mesh.vertices[tri[1]];
      const Vec3& c = mesh.vertices[tri[2]];
      const Vec3 n = (b - a).cross(c - a);
      const double len = n.norm();
      if (!(len > 0.0) || !std::isfinite(len)) {
        ++dropped;
        continue;
      }
      kept.push_back(tri);
      normals.push_back(n / len);
    }
    mesh.triangles = std::move(kept);
    mesh.normals = std::move(normals);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      geometry->triangles.push_back(
          Triangle::fromVertices(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]));
      geometry->normals.push_back(mesh.normals[t]);
      geometry->triangle_object.push_back(mesh.object_id);
    }
    if (materials_.count(mesh.object_id) == 0) {
      auto it = materials.objects.find(mesh.object_id);
      materials_[mesh.object_id] = it != materials.objects.end() ? it->second : Material{};
    }
    if (auto it = materials.labels.find(mesh.object_id); it != materials.labels.end()) {
      labels_[mesh.object_id] = it->second;
    }
  }
  if (dropped > 0) {
    std::cerr << "warning: dropped " << dropped << " degenerate triangle(s)\n";
  }
  geometry->bvh = Bvh(geometry->triangles);
  geometry->meshes = std::move(meshes);
  data_ = std::move(geometry);
  dropped_degenerate_ = dropped;
}

const Material& Scene::material(int object_id) const {
  static const Material kDefault{};
  auto it = materials_.find(object_id);
  return it != materials_.end() ? it->second : kDefault;
}

RayHit Scene::castRay(const Vec3& origin, const Vec3& direction, double max_range) const {
  if (std::abs(direction.norm() - 1.0) > 1e-6) {
    throw ContractViolation("cast_ray: direction must be unit length (norm " + std::to_string(direction.norm()) + ")");
  }
  if (!(max_range > 0.0)) throw ContractViolation("cast_ray: max_range must be positive");

  RayHit result;
  result.incident = direction;
  const BvhHit hit = data_->bvh.intersect(origin, direction, kMinHitDistance, max_range);
  if (!hit.hit) return result;

  result.hit = true;
  result.range = hit.t;
  result.point = origin + hit.t * direction;
  result.triangle = hit.triangle;
  result.normal = data_->normals[hit.triangle];
  if (result.normal.dot(direction) > 0.0) result.normal = -result.normal;
  result.object_id = data_->triangle_object[hit.triangle];
  result.material = material(result.object_id);
  return result;
}

Scene Scene::withSemanticMaterials(const std::map<int, std::string>& label_map,
                                   const std::map<std::string, Material>& material_by_label) const {
  std::set<std::string> missing;
  for (const auto& [id, label] : label_map) {
    if (material_by_label.count(label) == 0) missing.insert(label);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + ("\"" + m + "\"");
    throw ConfigError("no material for label(s): " + names);
  }
  Scene out = *this;
  for (const auto& [id, label] : label_map) {
    if (out.materials_.count(id) == 0) continue;
    out.materials_[id] = material_by_label.at(label);
    out.labels_[id] = label;
  }
  return out;
}

Scene loadScene(const std::filesystem::path& path, const MaterialTable& materials) {
  if (!std::filesystem::exists(path)) throw LoadError("scene file not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  std::vector<TriangleMesh> meshes;
  if (ext == ".obj") {
    meshes = readObj(path);
  } else if (ext == ".glb") {
    meshes = readGlb(path);
  } else {
    throw LoadError("unsupported mesh format '" + ext + "' (expected .obj or .glb): " + path.string());
  }
  return Scene(std::move(meshes), materials);
}

} // namespace marisim
