#pragma once

#include "marisim/common.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace marisim {

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return (max.array() < min.array()).any(); }
  double surfaceArea() const {
    if (empty()) return 0.0;
    const Vec3 d = max - min;
    return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.z() * d.x());
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

// Edge-form triangle, ready for Moller-Trumbore.
struct Triangle {
  Vec3 v0;
  Vec3 e1;
  Vec3 e2;

  static Triangle fromVertices(const Vec3& a, const Vec3& b, const Vec3& c) { return {a, b - a, c - a}; }
  Aabb bounds() const {
    Aabb box;
    box.extend(v0);
    box.extend(v0 + e1);
    box.extend(v0 + e2);
    return box;
  }
  Vec3 centroid() const { return v0 + (e1 + e2) / 3.0; }
};

// Two-sided ray/triangle test. Writes the ray parameter on hit.
inline bool intersectTriangle(const Triangle& tri, const Vec3& origin, const Vec3& dir, double& t_out) {
  const Vec3 p = dir.cross(tri.e2);
  const double det = tri.e1.dot(p);
  if (std::abs(det) < 1e-18) return false;
  const double inv_det = 1.0 / det;
  const Vec3 s = origin - tri.v0;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(tri.e1);
  const double v = dir.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;
  t_out = tri.e2.dot(q) * inv_det;
  return true;
}

struct BvhHit {
  bool hit = false;
  double t = std::numeric_limits<double>::infinity();
  std::uint32_t triangle = std::numeric_limits<std::uint32_t>::max();
};

// Binary BVH built with binned surface-area-heuristic splits. Leaves hold at
// most kMaxLeafSize triangles. The structure is immutable after construction
// and safe for concurrent queries.
class Bvh {
 public:
  static constexpr std::uint32_t kMaxLeafSize = 4;
  static constexpr int kBins = 16;

  Bvh() = default;
  explicit Bvh(std::span<const Triangle> triangles);

  // Nearest hit with t in [t_min, t_max]. Ties at equal t resolve to the
  // lowest triangle index.
  BvhHit intersect(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;

  std::size_t nodeCount() const { return nodes_.size(); }
  std::size_t triangleCount() const { return triangles_.size(); }
  int depth() const { return depth_; }
  // Largest triangle count stored in any leaf.
  std::uint32_t maxLeafSize() const;
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_.front().box; }

 private:
  struct Node {
    Aabb box;
    // Leaf: first index into order_. Interior: index of the right child
    // (the left child immediately follows its parent).
    std::uint32_t offset = 0;
    std::uint32_t count = 0;  // 0 for interior nodes
    std::uint8_t axis = 0;
  };

  struct BuildRef {
    Aabb box;
    Vec3 centroid;
    std::uint32_t index;
  };

  std::uint32_t build(std::vector<BuildRef>& refs, std::uint32_t begin, std::uint32_t end, int level);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Triangle> triangles_;
  int depth_ = 0;
};

} // namespace marisim
