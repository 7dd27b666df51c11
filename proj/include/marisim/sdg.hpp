#pragma once

#include "marisim/camera.hpp"
#include "marisim/nav.hpp"
#include "marisim/scene.hpp"
#include "marisim/sonar.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace marisim {

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  Vec3 velocity = Vec3::Zero();  // body frame, m/s
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  void validate() const;
  double start() const { return samples.front().t; }
  double end() const { return samples.back().t; }

  // CSV with header t,x,y,z,qw,qx,qy,qz,vx,vy,vz
  static Trajectory loadCsv(const std::filesystem::path& path);
  static Trajectory fromCsvText(const std::string& text);
};

// Linear position/velocity, spherical orientation. Throws std::out_of_range
// outside [start, end].
TrajectorySample interpolatePose(const Trajectory& traj, double t);

// Camera mount that maps the optical frame (z forward, x right, y down) onto
// a body frame with x forward, y left, z up.
Pose forwardCameraMount();

struct CameraSensorConfig {
  bool enabled = true;
  double rate_hz = 10.0;
  CameraIntrinsics intrinsics{320, 240, 250.0, 250.0, 159.5, 119.5};
  LightConfig lighting;
  WaterColumnParams water = WaterColumnParams::preset("clear");
  DepthConvention depth_convention = DepthConvention::Range;
  double no_hit_range = 50.0;
  Pose mount = forwardCameraMount();  // sensor-to-body
};

struct SonarSensorConfig {
  bool enabled = true;
  double rate_hz = 5.0;
  SonarConfig sonar;
  int fan_width = 512;
  int fan_height = 256;
  Pose mount;
};

struct DvlSensorConfig {
  bool enabled = true;
  DvlConfig dvl;
  Pose mount;
};

struct BarometerSensorConfig {
  bool enabled = true;
  double rate_hz = 20.0;
  BarometerConfig barometer;
  double surface_z = 0.0;  // world z of the water surface
};

struct SimConfig {
  std::filesystem::path scene_path;
  std::optional<std::filesystem::path> material_table_path;
  std::optional<std::filesystem::path> trajectory_path;
  Pose pose;  // single-frame render pose when no trajectory is used
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned workers = 0;
  CameraSensorConfig camera;
  SonarSensorConfig sonar;
  DvlSensorConfig dvl;
  BarometerSensorConfig barometer;

  // Relative paths in the document resolve against base_dir.
  static SimConfig fromJson(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static SimConfig load(const std::filesystem::path& path);
  nlohmann::json toJson() const;
  void validate() const;
};

struct RunSummary {
  std::size_t camera_frames = 0;
  std::size_t sonar_frames = 0;
  std::size_t dvl_samples = 0;
  std::size_t dvl_invalid = 0;
  std::size_t barometer_samples = 0;
  std::vector<std::filesystem::path> files;  // relative to the output dir
};

// Fire times of a fixed-rate sensor: start + k/rate, including end when it
// lands on the grid (1e-9 s tolerance).
std::vector<double> fixedRateTimes(double start, double end, double rate_hz);

struct RunOptions {
  // Remove previous outputs of this tool in a non-empty output directory.
  bool overwrite = false;
};

// Plays the trajectory, fires every enabled sensor at its rate and writes the
// dataset plus manifest.json. Validates assets and the output directory
// before any sensor fires.
RunSummary runSimulation(const SimConfig& config, const Trajectory& traj, const RunOptions& options = {});

// One frame of every enabled sensor at a fixed body pose.
RunSummary renderSingleFrame(const SimConfig& config, const Pose& body_pose, const RunOptions& options = {});

} // namespace marisim
