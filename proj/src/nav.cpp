#include "marisim/nav.hpp"

#include "marisim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace marisim {

void DvlConfig::validate() const {
  if (!(janus_angle_deg > 0.0 && janus_angle_deg < 90.0)) throw ConfigError("dvl.janus_angle_deg must be in (0, 90)");
  if (!(max_beam_range > 0.0)) throw ConfigError("dvl.max_beam_range must be positive");
  if (!(velocity_noise_std >= 0.0) || !std::isfinite(velocity_noise_std)) {
    throw ConfigError("dvl.velocity_noise_std must be finite and >= 0");
  }
  if (rate_curve.empty()) throw ConfigError("dvl.rate_curve must not be empty");
  for (std::size_t k = 0; k < rate_curve.size(); ++k) {
    if (!(rate_curve[k].rate_hz > 0.0)) throw ConfigError("dvl.rate_curve[" + std::to_string(k) + "].rate_hz must be > 0");
    if (k > 0 && !(rate_curve[k].max_range > rate_curve[k - 1].max_range)) {
      throw ConfigError("dvl.rate_curve thresholds must be strictly increasing");
    }
  }
  if (min_valid_beams < 1 || min_valid_beams > 4) throw ConfigError("dvl.min_valid_beams must be in [1, 4]");
}

std::array<Vec3, 4> DvlConfig::beamDirections() const {
  const double tilt = deg2rad(janus_angle_deg);
  std::array<Vec3, 4> beams;
  for (int k = 0; k < 4; ++k) {
    const double az = deg2rad(45.0 + 90.0 * k);
    beams[k] = Vec3(std::sin(tilt) * std::cos(az), std::sin(tilt) * std::sin(az), -std::cos(tilt)).normalized();
  }
  return beams;
}

double DvlConfig::rateFor(double max_valid_range) const {
  for (const auto& bracket : rate_curve) {
    if (max_valid_range <= bracket.max_range) return bracket.rate_hz;
  }
  return rate_curve.back().rate_hz;
}

int DvlMeasurement::validBeamCount() const {
  return static_cast<int>(std::count(beam_valid.begin(), beam_valid.end(), true));
}

DvlMeasurement sampleDvl(const Scene& scene, const Pose& pose, const Vec3& true_velocity, const DvlConfig& config,
                         double time, std::uint64_t sample_index) {
  config.validate();
  pose.validate();
  DvlMeasurement m;
  m.timestamp = time;
  const auto beams = config.beamDirections();
  double max_valid = 0.0;
  bool any_valid = false;
  for (int k = 0; k < 4; ++k) {
    const RayHit hit = scene.castRay(pose.position, pose.rotate(beams[k]).normalized(), config.max_beam_range);
    if (hit.hit && hit.range <= config.max_beam_range) {
      m.beam_valid[k] = true;
      m.beam_ranges[k] = hit.range;
      max_valid = std::max(max_valid, hit.range);
      any_valid = true;
    }
  }
  // With no valid beam the device is searching at its longest-range mode.
  m.next_interval = 1.0 / (any_valid ? config.rateFor(max_valid) : config.rate_curve.back().rate_hz);
  m.valid = m.validBeamCount() >= config.min_valid_beams;
  if (m.valid) {
    const rng::KeyedSampler sampler(config.seed);
    for (int axis = 0; axis < 3; ++axis) {
      m.velocity[axis] = true_velocity[axis] + sampler.normal(config.velocity_noise_std, sample_index, 0, 0,
                                                              static_cast<std::uint64_t>(axis));
    }
  }
  return m;
}

void BarometerConfig::validate() const {
  if (!(atmospheric_pressure > 0.0)) throw ConfigError("barometer.atmospheric_pressure must be positive");
  if (!(water_density > 0.0)) throw ConfigError("barometer.water_density must be positive");
  if (!(gravity > 0.0)) throw ConfigError("barometer.gravity must be positive");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("barometer.noise_std must be finite and >= 0");
}

double sampleBarometer(double depth_below_surface, const BarometerConfig& config, std::uint64_t sample_index) {
  if (!(depth_below_surface >= 0.0)) throw ContractViolation("sampleBarometer: depth must be >= 0");
  config.validate();
  double pressure = config.atmospheric_pressure + config.water_density * config.gravity * depth_below_surface;
  if (config.noise_std > 0.0) pressure += rng::KeyedSampler(config.seed).normal(config.noise_std, sample_index);
  return pressure;
}

} // namespace marisim
