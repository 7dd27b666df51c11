#pragma once

#include "marisim/common.hpp"
#include "marisim/scene.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace marisim {

struct DvlRateBracket {
  double max_range;  // meters, inclusive upper bound
  double rate_hz;
};

// Four-beam Janus DVL. Beams tilt janus_angle_deg away from the sensor -z
// axis at azimuths 45, 135, 225 and 315 degrees.
struct DvlConfig {
  double janus_angle_deg = 30.0;
  double max_beam_range = 50.0;
  double velocity_noise_std = 0.0;
  std::vector<DvlRateBracket> rate_curve{{20.0, 8.0}, {50.0, 4.0}};
  int min_valid_beams = 3;
  std::uint64_t seed = 0;

  void validate() const;
  // Beam unit vectors in the sensor frame.
  std::array<Vec3, 4> beamDirections() const;
  // Rate selected by the largest valid beam range: the first bracket whose
  // bound is >= range, else the last bracket.
  double rateFor(double max_valid_range) const;
};

struct DvlMeasurement {
  double timestamp = 0.0;
  Vec3 velocity = Vec3::Zero();  // sensor frame; meaningful only when valid
  std::array<double, 4> beam_ranges{};  // 0 for invalid beams
  std::array<bool, 4> beam_valid{};
  bool valid = false;
  double next_interval = 0.0;

  int validBeamCount() const;
};

// Noise draws are keyed by (seed, sample_index).
DvlMeasurement sampleDvl(const Scene& scene, const Pose& pose, const Vec3& true_velocity, const DvlConfig& config,
                         double time, std::uint64_t sample_index = 0);

struct BarometerConfig {
  double atmospheric_pressure = 101325.0;  // Pa
  double water_density = 1000.0;           // kg/m^3
  double gravity = 9.80665;                // m/s^2
  double noise_std = 0.0;                  // Pa
  std::uint64_t seed = 0;

  void validate() const;
};

// Hydrostatic pressure in Pa. Throws ContractViolation for negative depth.
double sampleBarometer(double depth_below_surface, const BarometerConfig& config, std::uint64_t sample_index = 0);

} // namespace marisim
