#include "marisim/sonar.hpp"

#include "marisim/parallel.hpp"
#include "marisim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace marisim {

void SonarNoiseParams::validate() const {
  if (!(sigma_phi >= 0.0) || !std::isfinite(sigma_phi)) throw ConfigError("noise.sigma_phi must be finite and >= 0");
  if (enabled && !(sigma_phi > 0.0)) throw ConfigError("noise.sigma_phi must be > 0 when noise is enabled");
  if (!(sigma_additive >= 0.0) || !std::isfinite(sigma_additive)) {
    throw ConfigError("noise.sigma_additive must be finite and >= 0");
  }
  if (!(sigma_mult >= 0.0) || !std::isfinite(sigma_mult)) throw ConfigError("noise.sigma_mult must be finite and >= 0");
}

void SonarConfig::validate() const {
  if (!(hfov_deg > 0.0 && hfov_deg <= 180.0)) throw ConfigError("sonar.hfov_deg must be in (0, 180]");
  if (ray_distribution == RayDistribution::PinholeGrid && !(hfov_deg < 180.0)) {
    throw ConfigError("sonar.hfov_deg must be below 180 for the pinhole ray distribution");
  }
  if (!(vfov_deg > 0.0 && vfov_deg < 90.0)) throw ConfigError("sonar.vfov_deg must be in (0, 90)");
  if (rays_azimuth < 1) throw ConfigError("sonar.rays_azimuth must be >= 1");
  if (rays_elevation < 1) throw ConfigError("sonar.rays_elevation must be >= 1");
  if (!(range_min >= 0.0)) throw ConfigError("sonar.range_min must be >= 0");
  if (!(range_max > range_min) || !std::isfinite(range_max)) throw ConfigError("sonar.range_max must exceed range_min");
  if (bins_range < 1) throw ConfigError("sonar.bins_range must be >= 1");
  if (bins_azimuth < 1) throw ConfigError("sonar.bins_azimuth must be >= 1");
  if (!(attenuation >= 0.0) || !std::isfinite(attenuation)) throw ConfigError("sonar.attenuation must be >= 0");
  noise.validate();
}

PolarGrid::PolarGrid(const SonarConfig& config)
    : rows_(config.bins_range),
      cols_(config.bins_azimuth),
      range_min_(config.range_min),
      range_max_(config.range_max),
      hfov_(config.hfovRad()),
      values_(static_cast<std::size_t>(config.bins_range) * config.bins_azimuth, 0.0) {}

double PolarGrid::rangeCenter(int i) const { return range_min_ + (i + 0.5) * (range_max_ - range_min_) / rows_; }

double PolarGrid::azimuthCenter(int j) const { return -0.5 * hfov_ + (j + 0.5) * hfov_ / cols_; }

double PolarGrid::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double PolarGrid::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

double fanAngle(int k, int n, double fov_rad) {
  if (n <= 1) return 0.0;
  const double half = 0.5 * fov_rad;
  // clamped so the end rays never round outside the fan
  return std::clamp(-half + fov_rad * static_cast<double>(k) / static_cast<double>(n - 1), -half, half);
}

namespace {

// Separable fan description: the unnormalized sensor-frame direction of ray
// (a, e) is (el_c[e] * az_x[a], el_c[e] * az_y[a], el_s[e]).
struct FanAxes {
  std::vector<double> azimuth;
  std::vector<double> az_x, az_y;
  std::vector<double> el_c, el_s;
};

FanAxes fanAxes(const SonarConfig& c) {
  FanAxes f;
  const int na = c.rays_azimuth, ne = c.rays_elevation;
  f.azimuth.resize(na);
  f.az_x.resize(na);
  f.az_y.resize(na);
  f.el_c.resize(ne);
  f.el_s.resize(ne);
  const bool pinhole = c.ray_distribution == RayDistribution::PinholeGrid;
  const double half_h = 0.5 * c.hfovRad();
  const double half_v = 0.5 * c.vfovRad();
  for (int a = 0; a < na; ++a) {
    const double angle = fanAngle(a, na, c.hfovRad());
    if (pinhole) {
      const double u = std::tan(half_h) * (angle / half_h);
      f.azimuth[a] = std::clamp(std::atan(u), -half_h, half_h);
      f.az_x[a] = 1.0;
      f.az_y[a] = -u;
    } else {
      f.azimuth[a] = angle;
      f.az_x[a] = std::cos(angle);
      f.az_y[a] = -std::sin(angle);
    }
  }
  for (int e = 0; e < ne; ++e) {
    const double angle = fanAngle(e, ne, c.vfovRad());
    if (pinhole) {
      f.el_c[e] = 1.0;
      f.el_s[e] = std::tan(half_v) * (angle / half_v);
    } else {
      f.el_c[e] = std::cos(angle);
      f.el_s[e] = std::sin(angle);
    }
  }
  return f;
}

Vec3 fanLocal(const FanAxes& f, int a, int e) {
  return Vec3(f.el_c[e] * f.az_x[a], f.el_c[e] * f.az_y[a], f.el_s[e]).normalized();
}

} // namespace

std::vector<FanRay> generateRayFan(const SonarConfig& config, const Pose& pose) {
  config.validate();
  const FanAxes f = fanAxes(config);
  std::vector<FanRay> rays;
  rays.reserve(static_cast<std::size_t>(config.rays_azimuth) * config.rays_elevation);
  for (int a = 0; a < config.rays_azimuth; ++a) {
    for (int e = 0; e < config.rays_elevation; ++e) {
      const Vec3 local = fanLocal(f, a, e);
      rays.push_back({f.azimuth[a], std::asin(std::clamp(local.z(), -1.0, 1.0)), pose.rotate(local).normalized()});
    }
  }
  return rays;
}

double computeReturnIntensity(const RayHit& hit, double alpha) {
  if (!hit.hit) throw ContractViolation("computeReturnIntensity called on a miss");
  const double cosine = -hit.incident.normalized().dot(hit.normal.normalized());
  return hit.material.acoustic_reflectance * std::max(0.0, cosine) * std::exp(-alpha * hit.range);
}

int rangeBinIndex(double range, const SonarConfig& config) {
  if (!(range >= config.range_min && range <= config.range_max)) return -1;
  const auto i = static_cast<int>(std::floor((range - config.range_min) * config.bins_range /
                                             (config.range_max - config.range_min)));
  return std::min(i, config.bins_range - 1);
}

int azimuthBinIndex(double azimuth_rad, const SonarConfig& config) {
  const double half = 0.5 * config.hfovRad();
  if (!(azimuth_rad >= -half && azimuth_rad <= half)) return -1;
  const auto j = static_cast<int>(std::floor((azimuth_rad + half) * config.bins_azimuth / config.hfovRad()));
  return std::min(j, config.bins_azimuth - 1);
}

PolarGrid binReturns(std::span<const SonarReturn> returns, const SonarConfig& config) {
  config.validate();
  PolarGrid grid(config);
  for (const SonarReturn& r : returns) {
    const int i = rangeBinIndex(r.range, config);
    const int j = azimuthBinIndex(r.azimuth, config);
    if (i < 0 || j < 0) continue;
    grid.at(i, j) += r.intensity;
  }
  return grid;
}

double speckleBin(double intensity, double range, double range_max, double azimuth, double sigma_phi,
                  const SpeckleSample& sample) {
  const double gain = std::exp(-(azimuth * azimuth) / sigma_phi);
  const double additive = (range * range) / (range_max * range_max) * (1.0 + 0.5 * gain * sample.w_sa);
  return std::max(0.0, intensity * (0.5 + sample.w_sm) + additive);
}

SpeckleSample speckleDraw(const SonarNoiseParams& noise, std::uint64_t seed, std::uint64_t frame, int i, int j) {
  const rng::KeyedSampler sampler(seed);
  const auto ui = static_cast<std::uint64_t>(i);
  const auto uj = static_cast<std::uint64_t>(j);
  return {sampler.rayleigh(noise.sigma_additive, frame, ui, uj), sampler.normal(noise.sigma_mult, frame, ui, uj)};
}

PolarGrid applySonarNoise(const PolarGrid& grid, const SonarNoiseParams& noise, const SonarConfig& config,
                          const std::function<SpeckleSample(int, int)>& sampler) {
  if (!noise.enabled) return grid;
  noise.validate();
  PolarGrid out = grid;
  for (int i = 0; i < grid.rows(); ++i) {
    const double r = grid.rangeCenter(i);
    for (int j = 0; j < grid.cols(); ++j) {
      out.at(i, j) = speckleBin(grid.at(i, j), r, config.range_max, grid.azimuthCenter(j), noise.sigma_phi, sampler(i, j));
    }
  }
  return out;
}

PolarGrid applySonarNoise(const PolarGrid& grid, const SonarNoiseParams& noise, const SonarConfig& config,
                          std::uint64_t seed, std::uint64_t frame) {
  return applySonarNoise(grid, noise, config,
                         [&](int i, int j) { return speckleDraw(noise, seed, frame, i, j); });
}

PolarGrid normalizeRangeWise(const PolarGrid& grid) {
  PolarGrid out = grid;
  for (int i = 0; i < out.rows(); ++i) {
    double row_max = 0.0;
    for (int j = 0; j < out.cols(); ++j) row_max = std::max(row_max, out.at(i, j));
    if (row_max <= 0.0) continue;
    for (int j = 0; j < out.cols(); ++j) out.at(i, j) /= row_max;
  }
  return out;
}

PolarGrid renderSonar(const Scene& scene, const Pose& pose, const SonarConfig& config, std::uint64_t frame) {
  config.validate();
  pose.validate();

  // Each azimuth bin column is owned by exactly one work item and its rays
  // are summed in a fixed (azimuth, elevation) order, so the grid does not
  // depend on the number of workers.
  const FanAxes f = fanAxes(config);
  std::vector<std::vector<int>> rays_in_column(config.bins_azimuth);
  for (int a = 0; a < config.rays_azimuth; ++a) rays_in_column[azimuthBinIndex(f.azimuth[a], config)].push_back(a);
  const Eigen::Matrix3d rotation = pose.orientation.toRotationMatrix();

  PolarGrid grid(config);
  parallelFor(rays_in_column.size(), config.workers, [&](std::size_t j) {
    std::vector<double> column(config.bins_range, 0.0);
    for (int a : rays_in_column[j]) {
      for (int e = 0; e < config.rays_elevation; ++e) {
        const Vec3 dir = (rotation * fanLocal(f, a, e)).normalized();
        const RayHit hit = scene.castRay(pose.position, dir, config.range_max);
        if (!hit.hit) continue;
        const int i = rangeBinIndex(hit.range, config);
        if (i < 0) continue;
        column[i] += computeReturnIntensity(hit, config.attenuation);
      }
    }
    for (int i = 0; i < config.bins_range; ++i) grid.at(i, static_cast<int>(j)) = column[i];
  });

  const bool normalize = config.normalization == SonarNormalization::RangeWise;
  if (config.noise_order == NoiseOrder::NormalizeThenNoise && normalize) grid = normalizeRangeWise(grid);
  grid = applySonarNoise(grid, config.noise, config, config.seed, frame);
  if (config.noise_order == NoiseOrder::NoiseThenNormalize && normalize) grid = normalizeRangeWise(grid);
  return grid;
}

Image projectFanImage(const PolarGrid& grid, const SonarConfig& config, int width, int height) {
  if (width < 1 || height < 1) throw ContractViolation("projectFanImage: image size must be positive");
  Image image(width, height, 1);
  const double half = 0.5 * config.hfovRad();
  const double half_width_m = config.range_max * (half < 0.5 * kPi ? std::sin(half) : 1.0);
  const double scale = std::min(width / (2.0 * half_width_m), height / config.range_max);  // px per meter
  const double origin_x = 0.5 * width;
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const double x = (px + 0.5 - origin_x) / scale;
      const double y = (height - (py + 0.5)) / scale;
      const double r = std::hypot(x, y);
      const double phi = std::atan2(x, y);
      const int i = rangeBinIndex(r, config);
      const int j = azimuthBinIndex(phi, config);
      if (i < 0 || j < 0) continue;
      image.at(px, py) = static_cast<float>(grid.at(i, j));
    }
  }
  return image;
}

Image polarGridImage(const PolarGrid& grid) {
  Image image(grid.cols(), grid.rows(), 1);
  const double peak = grid.max();
  const double scale = peak > 1.0 ? 1.0 / peak : 1.0;
  for (int i = 0; i < grid.rows(); ++i) {
    for (int j = 0; j < grid.cols(); ++j) image.at(j, i) = static_cast<float>(grid.at(i, j) * scale);
  }
  return image;
}

void writePolarCsv(const std::filesystem::path& path, const PolarGrid& grid) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[32];
  for (int i = 0; i < grid.rows(); ++i) {
    for (int j = 0; j < grid.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", grid.at(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

} // namespace marisim
