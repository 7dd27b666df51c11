#pragma once

#include "marisim/common.hpp"
#include "marisim/image.hpp"
#include "marisim/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace marisim {

// Speckle model parameters. Defaults are authored to give a plausible
// Oculus-like look; they are not measured values.
struct SonarNoiseParams {
  double sigma_phi = 0.1;       // beam-pattern gain width, rad^2
  double sigma_additive = 0.15; // Rayleigh scale
  double sigma_mult = 0.2;      // Gaussian std
  bool enabled = true;

  void validate() const;
};

enum class SonarNormalization { None, RangeWise };
enum class NoiseOrder { NoiseThenNormalize, NormalizeThenNoise };
// AngularFan spaces rays uniformly in azimuth and elevation. PinholeGrid
// spaces them uniformly on the image plane x = 1, like a rendered viewport.
enum class RayDistribution { AngularFan, PinholeGrid };

// Forward-looking multibeam sonar. Sensor frame: x boresight, y port, z up.
// Azimuth is positive toward starboard, elevation positive upward.
struct SonarConfig {
  double hfov_deg = 130.0;
  double vfov_deg = 20.0;
  int rays_azimuth = 3000;
  int rays_elevation = 460;
  double range_min = 0.1;
  double range_max = 30.0;
  int bins_range = 350;
  int bins_azimuth = 220;
  double attenuation = 0.02;  // 1/m
  SonarNoiseParams noise;
  SonarNormalization normalization = SonarNormalization::RangeWise;
  NoiseOrder noise_order = NoiseOrder::NoiseThenNormalize;
  RayDistribution ray_distribution = RayDistribution::AngularFan;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  void validate() const;
  double hfovRad() const { return deg2rad(hfov_deg); }
  double vfovRad() const { return deg2rad(vfov_deg); }
};

// Range x azimuth intensity grid. Row i is a range bin (near to far), column
// j an azimuth bin (port to starboard).
class PolarGrid {
 public:
  PolarGrid() = default;
  explicit PolarGrid(const SonarConfig& config);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double rangeCenter(int i) const;    // meters
  double azimuthCenter(int j) const;  // radians, 0 at boresight
  double rangeMax() const { return range_max_; }
  double sum() const;
  double max() const;

  bool operator==(const PolarGrid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double range_min_ = 0.0;
  double range_max_ = 1.0;
  double hfov_ = 0.0;
  std::vector<double> values_;
};

struct FanRay {
  double azimuth;    // rad
  double elevation;  // rad
  Vec3 direction;    // world frame, unit
};

struct SonarReturn {
  double range;
  double azimuth;
  double intensity;
};

struct SpeckleSample {
  double w_sa;  // Rayleigh draw
  double w_sm;  // Gaussian draw
};

// Endpoint-inclusive ray fan in azimuth-major order. Every ray in one
// azimuth index shares the same azimuth under both distributions.
std::vector<FanRay> generateRayFan(const SonarConfig& config, const Pose& pose);
// Angle of fan sample k out of n spanning [-fov/2, +fov/2].
double fanAngle(int k, int n, double fov_rad);

// Reflectance times clamped incidence cosine times range attenuation.
double computeReturnIntensity(const RayHit& hit, double alpha);

// Bin index helpers; -1 when the value is outside the grid.
int rangeBinIndex(double range, const SonarConfig& config);
int azimuthBinIndex(double azimuth_rad, const SonarConfig& config);

PolarGrid binReturns(std::span<const SonarReturn> returns, const SonarConfig& config);

// Speckle composition for one bin given its noise draws.
double speckleBin(double intensity, double range, double range_max, double azimuth, double sigma_phi,
                  const SpeckleSample& sample);

// Draws come from a counter-based generator keyed by (seed, frame, i, j).
PolarGrid applySonarNoise(const PolarGrid& grid, const SonarNoiseParams& noise, const SonarConfig& config,
                          std::uint64_t seed, std::uint64_t frame = 0);
// Same composition with caller-supplied draws per bin.
PolarGrid applySonarNoise(const PolarGrid& grid, const SonarNoiseParams& noise, const SonarConfig& config,
                          const std::function<SpeckleSample(int, int)>& sampler);
SpeckleSample speckleDraw(const SonarNoiseParams& noise, std::uint64_t seed, std::uint64_t frame, int i, int j);

PolarGrid normalizeRangeWise(const PolarGrid& grid);

// Full pipeline: fan, ray cast, intensity, binning, noise, normalization.
PolarGrid renderSonar(const Scene& scene, const Pose& pose, const SonarConfig& config, std::uint64_t frame = 0);

// Nearest-neighbour resampling of the grid into the Cartesian fan. The sensor
// sits at the bottom-center; boresight points up the image.
Image projectFanImage(const PolarGrid& grid, const SonarConfig& config, int width, int height);

// Grid as a single-channel image (rows near to far, columns port to
// starboard). Grids whose maximum exceeds 1 are scaled by that maximum.
Image polarGridImage(const PolarGrid& grid);
void writePolarCsv(const std::filesystem::path& path, const PolarGrid& grid);

} // namespace marisim
