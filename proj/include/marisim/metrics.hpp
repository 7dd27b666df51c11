#pragma once

#include "marisim/image.hpp"
#include "marisim/scene.hpp"
#include "marisim/sonar.hpp"

#include <string>
#include <utility>
#include <vector>

namespace marisim {

// Angle in degrees between two RGB vectors. Throws std::domain_error when
// either vector is zero.
double rgbAngularError(const Rgb& a, const Rgb& b);

struct PatchSpec {
  std::string name;
  std::vector<std::pair<int, int>> pixels;  // (x, y)
};

struct PatchError {
  std::string name;
  Rgb reference_mean{};
  Rgb rendered_mean{};
  double error_deg = 0.0;
};

struct PatchReport {
  std::vector<PatchError> patches;
  double mean_error_deg = 0.0;  // unweighted across patches
};

PatchReport patchErrorReport(const Image& reference, const Image& rendered, const std::vector<PatchSpec>& patches);

// {"patches": [{"name": "yellow", "pixels": [[x, y], ...]}, ...]}
std::vector<PatchSpec> patchSpecsFromJsonText(const std::string& text);
std::string patchReportToJsonText(const PatchReport& report);

struct BenchReport {
  std::string scene_name;
  int frames = 0;
  unsigned workers = 0;
  double total_seconds = 0.0;
  double fps = 0.0;
  double cache_seconds = 0.0;  // this engine builds no per-scene cache
  double warmup_seconds = 0.0;
  long long rays_per_frame = 0;
};

// Times `frames` end-to-end sonar renders at a fixed pose after one untimed
// warm-up frame. When fixed_frame_seed is set every frame uses noise frame
// index 0, so all grids are identical.
BenchReport benchSonar(const Scene& scene, const Pose& pose, const SonarConfig& config, int frames = 100,
                       const std::string& scene_name = "scene", bool fixed_frame_seed = true,
                       std::vector<PolarGrid>* grids_out = nullptr);

// Rippled seafloor heightfield about 5 m below the origin, spanning the
// default sonar fan out to 40 m. Has at least min_triangles triangles.
std::vector<TriangleMesh> syntheticSeafloor(int min_triangles, std::uint64_t seed = 1);
// Sensor at the origin, boresight +x pitched 10 degrees down.
Pose syntheticSeafloorPose();

std::string benchReportToJsonText(const BenchReport& report);
std::string benchReportTable(const BenchReport& report);

} // namespace marisim
