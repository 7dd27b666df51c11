#include "marisim/metrics.hpp"

#include "marisim/parallel.hpp"
#include "marisim/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace marisim {

using nlohmann::json;

double rgbAngularError(const Rgb& a, const Rgb& b) {
  const Vec3 va(a[0], a[1], a[2]);
  const Vec3 vb(b[0], b[1], b[2]);
  const double na = va.norm();
  const double nb = vb.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw std::domain_error("RGB angular error is undefined for a zero color vector");
  // atan2 form stays accurate near 0 and 180 degrees, where acos loses digits
  return rad2deg(std::atan2((va / na).cross(vb / nb).norm(), (va / na).dot(vb / nb)));
}

namespace {

Rgb patchMean(const Image& image, const PatchSpec& patch, const char* which) {
  if (patch.pixels.empty()) throw ConfigError("patch \"" + patch.name + "\" has no coordinates");
  Rgb sum{0.0, 0.0, 0.0};
  for (const auto& [x, y] : patch.pixels) {
    if (x < 0 || y < 0 || x >= image.width() || y >= image.height()) {
      throw ConfigError("patch \"" + patch.name + "\": coordinate (" + std::to_string(x) + ", " + std::to_string(y) +
                        ") is outside the " + which + " image");
    }
    for (int c = 0; c < 3; ++c) sum[c] += image.at(x, y, c);
  }
  for (double& s : sum) s /= static_cast<double>(patch.pixels.size());
  return sum;
}

} // namespace

PatchReport patchErrorReport(const Image& reference, const Image& rendered, const std::vector<PatchSpec>& patches) {
  if (reference.channels() != 3 || rendered.channels() != 3) throw ContractViolation("patchErrorReport: RGB images required");
  PatchReport report;
  double total = 0.0;
  for (const PatchSpec& patch : patches) {
    PatchError e;
    e.name = patch.name;
    e.reference_mean = patchMean(reference, patch, "reference");
    e.rendered_mean = patchMean(rendered, patch, "rendered");
    e.error_deg = rgbAngularError(e.reference_mean, e.rendered_mean);
    total += e.error_deg;
    report.patches.push_back(e);
  }
  report.mean_error_deg = patches.empty() ? 0.0 : total / static_cast<double>(patches.size());
  return report;
}

std::vector<PatchSpec> patchSpecsFromJsonText(const std::string& text) {
  std::vector<PatchSpec> specs;
  try {
    const json doc = json::parse(text);
    for (const auto& p : doc.at("patches")) {
      PatchSpec spec;
      spec.name = p.at("name").get<std::string>();
      for (const auto& xy : p.at("pixels")) spec.pixels.emplace_back(xy.at(0).get<int>(), xy.at(1).get<int>());
      if (spec.pixels.empty()) throw ConfigError("patch \"" + spec.name + "\" has no coordinates");
      specs.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("patch spec: ") + e.what());
  }
  return specs;
}

std::string patchReportToJsonText(const PatchReport& report) {
  json doc;
  doc["patches"] = json::array();
  for (const auto& p : report.patches) {
    doc["patches"].push_back({{"name", p.name},
                              {"reference_mean", p.reference_mean},
                              {"rendered_mean", p.rendered_mean},
                              {"error_deg", p.error_deg}});
  }
  doc["mean_error_deg"] = report.mean_error_deg;
  return doc.dump(2);
}

BenchReport benchSonar(const Scene& scene, const Pose& pose, const SonarConfig& config, int frames,
                       const std::string& scene_name, bool fixed_frame_seed, std::vector<PolarGrid>* grids_out) {
  if (frames < 1) throw ContractViolation("benchSonar: frames must be >= 1");
  using Clock = std::chrono::steady_clock;
  BenchReport report;
  report.scene_name = scene_name;
  report.frames = frames;
  report.workers = resolveWorkers(config.workers);
  report.rays_per_frame = static_cast<long long>(config.rays_azimuth) * config.rays_elevation;

  const auto warm_start = Clock::now();
  PolarGrid warm = renderSonar(scene, pose, config, 0);
  report.warmup_seconds = std::chrono::duration<double>(Clock::now() - warm_start).count();

  const auto start = Clock::now();
  for (int f = 0; f < frames; ++f) {
    PolarGrid grid = renderSonar(scene, pose, config, fixed_frame_seed ? 0 : static_cast<std::uint64_t>(f + 1));
    if (grids_out) grids_out->push_back(std::move(grid));
  }
  report.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.fps = report.frames / report.total_seconds;
  return report;
}

std::vector<TriangleMesh> syntheticSeafloor(int min_triangles, std::uint64_t seed) {
  if (min_triangles < 2) throw ContractViolation("syntheticSeafloor: need at least 2 triangles");
  const int n = static_cast<int>(std::ceil(std::sqrt(min_triangles / 2.0)));
  const double x0 = 0.0, x1 = 40.0, y0 = -40.0, y1 = 40.0;
  const rng::KeyedSampler sampler(seed);
  TriangleMesh mesh;
  mesh.name = "seafloor";
  mesh.object_id = 0;
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      const double x = x0 + (x1 - x0) * ix / n;
      const double y = y0 + (y1 - y0) * iy / n;
      const double jitter = 0.2 * (sampler.uniform(ix, iy) - 0.5);
      mesh.vertices.emplace_back(x, y, -5.0 + 0.3 * std::sin(0.7 * x) * std::cos(0.5 * y) + jitter);
    }
  }
  auto id = [n](int ix, int iy) { return static_cast<std::uint32_t>(iy * (n + 1) + ix); };
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      mesh.triangles.push_back({id(ix, iy), id(ix + 1, iy), id(ix + 1, iy + 1)});
      mesh.triangles.push_back({id(ix, iy), id(ix + 1, iy + 1), id(ix, iy + 1)});
    }
  }
  return {std::move(mesh)};
}

Pose syntheticSeafloorPose() {
  return {Vec3::Zero(), Quat(Eigen::AngleAxisd(deg2rad(10.0), Vec3::UnitY()))};
}

std::string benchReportToJsonText(const BenchReport& report) {
  json doc = {{"scene", report.scene_name},         {"frames", report.frames},
              {"workers", report.workers},          {"total_seconds", report.total_seconds},
              {"fps", report.fps},                  {"cache_seconds", report.cache_seconds},
              {"warmup_seconds", report.warmup_seconds}, {"rays_per_frame", report.rays_per_frame}};
  return doc.dump(2);
}

std::string benchReportTable(const BenchReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-16s %8s %8s %10s %10s %10s\n%-16s %8d %8u %10.3f %10.3f %10.3f\n", "scene", "frames", "workers",
                "seconds", "fps", "cache_s", report.scene_name.c_str(), report.frames, report.workers,
                report.total_seconds, report.fps, report.cache_seconds);
  return buf;
}

} // namespace marisim
