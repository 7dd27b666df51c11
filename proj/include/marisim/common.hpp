#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace marisim {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// Unreadable or malformed input file (mesh, image, trajectory).
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rigid transform from a sensor/body frame into the world frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose fromYaw(const Vec3& position, double yaw_rad) {
    return {position, Quat(Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()))};
  }

  // Throws ContractViolation when the quaternion is not unit length within 1e-9.
  void validate() const;

  Vec3 toWorld(const Vec3& local_point) const { return position + orientation * local_point; }
  Vec3 rotate(const Vec3& local_dir) const { return orientation * local_dir; }
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

} // namespace marisim
