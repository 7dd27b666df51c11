#pragma once

#include "marisim/bvh.hpp"
#include "marisim/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace marisim {

using Rgb = std::array<double, 3>;

struct Material {
  double acoustic_reflectance = 0.9;
  Rgb color{0.5, 0.5, 0.5};

  void validate(const std::string& context) const;
  bool operator==(const Material&) const = default;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;  // one per triangle
  int object_id = 0;
  std::string name;

  // Throws LoadError naming the first offending vertex or triangle.
  void validate() const;
};

// Object-level material assignments as read from a material table document:
// {"objects": [{"id", "label", "acoustic_reflectance", "color"}], "labels": {label: {...}}}
struct MaterialTable {
  std::map<int, Material> objects;
  std::map<int, std::string> labels;
  std::map<std::string, Material> by_label;

  static MaterialTable fromJsonText(const std::string& text);
  static MaterialTable load(const std::filesystem::path& path);
};

struct RayHit {
  bool hit = false;
  double range = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();    // faces the ray origin
  Vec3 incident = Vec3::Zero();  // unit ray direction
  int object_id = -1;
  std::uint32_t triangle = 0;
  Material material;

  bool operator==(const RayHit&) const = default;
};

// Immutable world geometry. Copies share the acceleration structure.
class Scene {
 public:
  // Hits closer than this are discarded (self-intersection guard).
  static constexpr double kMinHitDistance = 1e-4;

  Scene() = default;
  // Validates meshes, drops zero-area triangles (counted), computes unit
  // geometric normals and builds the BVH. Objects absent from `materials`
  // get the default Material.
  explicit Scene(std::vector<TriangleMesh> meshes, const MaterialTable& materials = {});

  const std::vector<TriangleMesh>& meshes() const { return data_->meshes; }
  std::size_t triangleCount() const { return data_->triangle_object.size(); }
  std::size_t droppedDegenerate() const { return dropped_degenerate_; }
  const Bvh& bvh() const { return data_->bvh; }
  // Triangles in global index order, for external checks.
  const std::vector<Triangle>& triangles() const { return data_->triangles; }

  const Material& material(int object_id) const;
  const std::map<int, Material>& materials() const { return materials_; }
  const std::map<int, std::string>& labels() const { return labels_; }

  RayHit castRay(const Vec3& origin, const Vec3& direction, double max_range) const;

  // Replaces materials of labeled objects; unlabeled objects keep theirs.
  Scene withSemanticMaterials(const std::map<int, std::string>& label_map,
                              const std::map<std::string, Material>& material_by_label) const;

 private:
  struct Geometry {
    std::vector<TriangleMesh> meshes;
    std::vector<Triangle> triangles;
    std::vector<Vec3> normals;
    std::vector<int> triangle_object;
    Bvh bvh;
  };

  std::shared_ptr<const Geometry> data_ = std::make_shared<const Geometry>();
  std::map<int, Material> materials_;
  std::map<int, std::string> labels_;
  std::size_t dropped_degenerate_ = 0;
};

// Loads an OBJ or binary glTF (.glb) scene and builds its BVH.
Scene loadScene(const std::filesystem::path& path, const MaterialTable& materials = {});

inline RayHit castRay(const Scene& scene, const Vec3& origin, const Vec3& direction, double max_range) {
  return scene.castRay(origin, direction, max_range);
}

inline Scene assignSemanticMaterials(const Scene& scene, const std::map<int, std::string>& label_map,
                                     const std::map<std::string, Material>& material_by_label) {
  return scene.withSemanticMaterials(label_map, material_by_label);
}

// Mesh file readers. Object ids are assigned in file order starting at 0.
std::vector<TriangleMesh> readObj(const std::filesystem::path& path);
std::vector<TriangleMesh> readObjText(const std::string& text);
std::vector<TriangleMesh> readGlb(const std::filesystem::path& path);
std::vector<TriangleMesh> readGlbBytes(const std::vector<std::uint8_t>& bytes);

} // namespace marisim
