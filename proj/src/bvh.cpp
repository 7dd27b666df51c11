#include "marisim/bvh.hpp"

#include <algorithm>
#include <array>

namespace marisim {

namespace {

// Past this depth the builder stops using SAH so the traversal stack stays bounded.
constexpr int kMaxSahLevel = 64;

struct Bin {
  Aabb box;
  std::uint32_t count = 0;
};

// Slab test. Returns the entry distance or +inf on a miss.
inline double rayBoxEntry(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, const std::array<bool, 3>& axis_parallel,
                          double t_min, double t_max) {
  double t0 = t_min;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    if (axis_parallel[a]) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double near = (box.min[a] - origin[a]) * inv_dir[a];
    double far = (box.max[a] - origin[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    t0 = near > t0 ? near : t0;
    t1 = far < t1 ? far : t1;
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

} // namespace

Bvh::Bvh(std::span<const Triangle> triangles) {
  if (triangles.empty()) return;

  std::vector<BuildRef> refs;
  refs.reserve(triangles.size());
  for (std::uint32_t i = 0; i < triangles.size(); ++i) {
    const Aabb box = triangles[i].bounds();
    refs.push_back({box, box.center(), i});
  }

  nodes_.reserve(2 * triangles.size() / kMaxLeafSize + 1);
  build(refs, 0, static_cast<std::uint32_t>(refs.size()), 1);

  order_.resize(refs.size());
  triangles_.resize(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    order_[i] = refs[i].index;
    triangles_[i] = triangles[refs[i].index];
  }
}

std::uint32_t Bvh::build(std::vector<BuildRef>& refs, std::uint32_t begin, std::uint32_t end, int level) {
  depth_ = std::max(depth_, level);
  const auto node_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(refs[i].box);
    centroid_box.extend(refs[i].centroid);
  }
  nodes_[node_index].box = box;

  const std::uint32_t count = end - begin;
  if (count <= kMaxLeafSize) {
    nodes_[node_index].offset = begin;
    nodes_[node_index].count = count;
    return node_index;
  }

  // Binned SAH over the centroid bounds.
  int best_axis = -1;
  int best_split = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  const Vec3 extent = centroid_box.max - centroid_box.min;
  for (int axis = 0; axis < 3 && level < kMaxSahLevel; ++axis) {
    if (extent[axis] <= 0.0) continue;
    std::array<Bin, kBins> bins{};
    const double scale = kBins / extent[axis];
    for (std::uint32_t i = begin; i < end; ++i) {
      int b = static_cast<int>((refs[i].centroid[axis] - centroid_box.min[axis]) * scale);
      b = std::clamp(b, 0, kBins - 1);
      bins[b].count++;
      bins[b].box.extend(refs[i].box);
    }
    std::array<double, kBins - 1> left_area{};
    std::array<std::uint32_t, kBins - 1> left_count{};
    Aabb acc;
    std::uint32_t n = 0;
    for (int b = 0; b < kBins - 1; ++b) {
      acc.extend(bins[b].box);
      n += bins[b].count;
      left_area[b] = acc.surfaceArea();
      left_count[b] = n;
    }
    acc = Aabb{};
    n = 0;
    for (int b = kBins - 1; b > 0; --b) {
      acc.extend(bins[b].box);
      n += bins[b].count;
      const std::uint32_t nl = left_count[b - 1];
      if (nl == 0 || n == 0) continue;
      const double cost = left_area[b - 1] * nl + acc.surfaceArea() * n;
      if (cost < best_cost) {
        best_cost = cost;
        best_axis = axis;
        best_split = b;
      }
    }
  }

  std::uint32_t mid;
  if (best_axis >= 0) {
    const double scale = kBins / extent[best_axis];
    const double lo = centroid_box.min[best_axis];
    auto it = std::partition(refs.begin() + begin, refs.begin() + end, [&](const BuildRef& r) {
      int b = static_cast<int>((r.centroid[best_axis] - lo) * scale);
      return std::clamp(b, 0, kBins - 1) < best_split;
    });
    mid = static_cast<std::uint32_t>(it - refs.begin());
    nodes_[node_index].axis = static_cast<std::uint8_t>(best_axis);
  } else {
    // Coincident centroids or a very deep branch: object-median split, which
    // bounds the remaining depth by log2(count).
    mid = begin + count / 2;
    int axis = 0;
    extent.maxCoeff(&axis);
    std::nth_element(refs.begin() + begin, refs.begin() + mid, refs.begin() + end, [axis](const BuildRef& a, const BuildRef& b) {
      return a.centroid[axis] < b.centroid[axis] || (a.centroid[axis] == b.centroid[axis] && a.index < b.index);
    });
    nodes_[node_index].axis = static_cast<std::uint8_t>(axis);
  }

  build(refs, begin, mid, level + 1);
  const std::uint32_t right = build(refs, mid, end, level + 1);
  nodes_[node_index].offset = right;
  nodes_[node_index].count = 0;
  return node_index;
}

std::uint32_t Bvh::maxLeafSize() const {
  std::uint32_t m = 0;
  for (const Node& n : nodes_) m = std::max(m, n.count);
  return m;
}

namespace {

// Coplanar triangles rarely produce bit-identical ray parameters, so ranges
// this close count as a tie and go to the lower triangle index.
double tieTolerance(double t) { return 1e-12 * std::max(1.0, t); }

} // namespace

BvhHit Bvh::intersect(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  BvhHit best;
  if (nodes_.empty()) return best;

  Vec3 inv_dir;
  std::array<bool, 3> parallel{};
  for (int a = 0; a < 3; ++a) {
    parallel[a] = dir[a] == 0.0;
    inv_dir[a] = parallel[a] ? 0.0 : 1.0 / dir[a];
  }

  double limit = t_max;
  std::array<std::uint32_t, 128> stack;
  int top = 0;
  if (rayBoxEntry(nodes_[0].box, origin, inv_dir, parallel, t_min, limit) == std::numeric_limits<double>::infinity()) {
    return best;
  }
  stack[top++] = 0;

  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.count > 0) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        double t;
        if (!intersectTriangle(triangles_[i], origin, dir, t)) continue;
        if (t < t_min || t > limit) continue;
        const std::uint32_t original = order_[i];
        const double tol = best.hit ? tieTolerance(best.t) : 0.0;
        const bool nearer = !best.hit || t < best.t - tol;
        const bool tie = !nearer && t <= best.t + tol;
        if (nearer || (tie && original < best.triangle)) {
          if (nearer || t < best.t) best.t = t;
          best.hit = true;
          best.triangle = original;
          limit = std::min(t_max, best.t + tieTolerance(best.t));
        }
      }
      continue;
    }

    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.offset;
    const double t_left = rayBoxEntry(nodes_[left].box, origin, inv_dir, parallel, t_min, limit);
    const double t_right = rayBoxEntry(nodes_[right].box, origin, inv_dir, parallel, t_min, limit);
    const bool hit_left = t_left != std::numeric_limits<double>::infinity();
    const bool hit_right = t_right != std::numeric_limits<double>::infinity();
    // Push the farther child first so the nearer one is popped next.
    if (hit_left && hit_right) {
      if (t_left <= t_right) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hit_left) {
      stack[top++] = left;
    } else if (hit_right) {
      stack[top++] = right;
    }
  }
  return best;
}

} // namespace marisim
