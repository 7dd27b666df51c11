#include "marisim/config_json.hpp"

#include <type_traits>

namespace marisim {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key + ": wrong type");
  }
}

Vec3 vec3From(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(field + " must be an array of 3 numbers");
  try {
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  } catch (const json::exception&) {
    throw ConfigError(field + " must be an array of 3 numbers");
  }
}

void requireObject(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
}

} // namespace

Pose poseFromJson(const json& j) {
  requireObject(j, "pose");
  Pose pose;
  if (j.contains("position")) pose.position = vec3From(j["position"], "pose.position");
  if (j.contains("orientation")) {
    const auto& q = j["orientation"];  // w, x, y, z
    if (!q.is_array() || q.size() != 4) throw ConfigError("pose.orientation must be [w, x, y, z]");
    pose.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    if (std::abs(pose.orientation.norm() - 1.0) > 1e-6) throw ConfigError("pose.orientation must be a unit quaternion");
    pose.orientation.normalize();
  } else if (j.contains("yaw_deg")) {
    pose.orientation = Quat(Eigen::AngleAxisd(deg2rad(j["yaw_deg"].get<double>()), Vec3::UnitZ()));
  }
  return pose;
}

json poseToJson(const Pose& pose) {
  const Quat& q = pose.orientation;
  return {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
          {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

CameraIntrinsics intrinsicsFromJson(const json& j) {
  requireObject(j, "intrinsics");
  CameraIntrinsics k;
  read(j, "width", k.width, "intrinsics.");
  read(j, "height", k.height, "intrinsics.");
  if (j.contains("hfov_deg")) {
    k = CameraIntrinsics::fromHorizontalFov(k.width, k.height, j["hfov_deg"].get<double>());
  } else {
    k.cx = 0.5 * (k.width - 1);
    k.cy = 0.5 * (k.height - 1);
    read(j, "fx", k.fx, "intrinsics.");
    read(j, "fy", k.fy, "intrinsics.");
    read(j, "cx", k.cx, "intrinsics.");
    read(j, "cy", k.cy, "intrinsics.");
  }
  k.validate();
  return k;
}

json intrinsicsToJson(const CameraIntrinsics& k) {
  return {{"width", k.width}, {"height", k.height}, {"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

LightConfig lightingFromJson(const json& j) {
  requireObject(j, "lighting");
  LightConfig l;
  if (j.contains("direction")) l.direction = vec3From(j["direction"], "lighting.direction");
  read(j, "directional", l.directional, "lighting.");
  read(j, "ambient", l.ambient, "lighting.");
  if (j.contains("background")) {
    const Vec3 b = vec3From(j["background"], "lighting.background");
    l.background = {b.x(), b.y(), b.z()};
  }
  if (!(l.direction.norm() > 0.0)) throw ConfigError("lighting.direction must be non-zero");
  if (!(l.ambient >= 0.0) || !(l.directional >= 0.0)) throw ConfigError("lighting intensities must be >= 0");
  return l;
}

json lightingToJson(const LightConfig& l) {
  return {{"direction", {l.direction.x(), l.direction.y(), l.direction.z()}},
          {"directional", l.directional},
          {"ambient", l.ambient},
          {"background", l.background}};
}

SonarConfig sonarConfigFromJson(const json& j, SonarConfig c) {
  requireObject(j, "sonar");
  const std::string p = "sonar.";
  read(j, "hfov_deg", c.hfov_deg, p);
  read(j, "vfov_deg", c.vfov_deg, p);
  read(j, "rays_azimuth", c.rays_azimuth, p);
  read(j, "rays_elevation", c.rays_elevation, p);
  read(j, "range_min", c.range_min, p);
  read(j, "range_max", c.range_max, p);
  read(j, "bins_range", c.bins_range, p);
  read(j, "bins_azimuth", c.bins_azimuth, p);
  read(j, "attenuation", c.attenuation, p);
  read(j, "seed", c.seed, p);
  read(j, "workers", c.workers, p);
  if (j.contains("normalization")) {
    const std::string n = j["normalization"].get<std::string>();
    if (n == "none") c.normalization = SonarNormalization::None;
    else if (n == "range_wise") c.normalization = SonarNormalization::RangeWise;
    else throw ConfigError("sonar.normalization must be \"none\" or \"range_wise\"");
  }
  if (j.contains("noise_order")) {
    const std::string n = j["noise_order"].get<std::string>();
    if (n == "noise_then_normalize") c.noise_order = NoiseOrder::NoiseThenNormalize;
    else if (n == "normalize_then_noise") c.noise_order = NoiseOrder::NormalizeThenNoise;
    else throw ConfigError("sonar.noise_order must be \"noise_then_normalize\" or \"normalize_then_noise\"");
  }
  if (j.contains("ray_distribution")) {
    const std::string d = j["ray_distribution"].is_string() ? j["ray_distribution"].get<std::string>() : "";
    if (d == "angular") c.ray_distribution = RayDistribution::AngularFan;
    else if (d == "pinhole") c.ray_distribution = RayDistribution::PinholeGrid;
    else throw ConfigError("sonar.ray_distribution must be \"angular\" or \"pinhole\"");
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    requireObject(n, "sonar.noise");
    read(n, "enabled", c.noise.enabled, "sonar.noise.");
    read(n, "sigma_phi", c.noise.sigma_phi, "sonar.noise.");
    read(n, "sigma_additive", c.noise.sigma_additive, "sonar.noise.");
    read(n, "sigma_mult", c.noise.sigma_mult, "sonar.noise.");
  }
  c.validate();
  return c;
}

json sonarConfigToJson(const SonarConfig& c) {
  return {{"hfov_deg", c.hfov_deg},
          {"vfov_deg", c.vfov_deg},
          {"rays_azimuth", c.rays_azimuth},
          {"rays_elevation", c.rays_elevation},
          {"range_min", c.range_min},
          {"range_max", c.range_max},
          {"bins_range", c.bins_range},
          {"bins_azimuth", c.bins_azimuth},
          {"attenuation", c.attenuation},
          {"seed", c.seed},
          {"normalization", c.normalization == SonarNormalization::None ? "none" : "range_wise"},
          {"noise_order",
           c.noise_order == NoiseOrder::NoiseThenNormalize ? "noise_then_normalize" : "normalize_then_noise"},
          {"ray_distribution", c.ray_distribution == RayDistribution::AngularFan ? "angular" : "pinhole"},
          {"noise",
           {{"enabled", c.noise.enabled},
            {"sigma_phi", c.noise.sigma_phi},
            {"sigma_additive", c.noise.sigma_additive},
            {"sigma_mult", c.noise.sigma_mult}}}};
}

DvlConfig dvlConfigFromJson(const json& j) {
  requireObject(j, "dvl");
  DvlConfig c;
  const std::string p = "dvl.";
  read(j, "janus_angle_deg", c.janus_angle_deg, p);
  read(j, "max_beam_range", c.max_beam_range, p);
  read(j, "velocity_noise_std", c.velocity_noise_std, p);
  read(j, "min_valid_beams", c.min_valid_beams, p);
  read(j, "seed", c.seed, p);
  if (j.contains("rate_curve")) {
    c.rate_curve.clear();
    for (const auto& entry : j["rate_curve"]) {
      if (!entry.is_array() || entry.size() != 2) throw ConfigError("dvl.rate_curve entries must be [range_m, rate_hz]");
      c.rate_curve.push_back({entry[0].get<double>(), entry[1].get<double>()});
    }
  }
  c.validate();
  return c;
}

json dvlConfigToJson(const DvlConfig& c) {
  json curve = json::array();
  for (const auto& b : c.rate_curve) curve.push_back({b.max_range, b.rate_hz});
  return {{"janus_angle_deg", c.janus_angle_deg},
          {"max_beam_range", c.max_beam_range},
          {"velocity_noise_std", c.velocity_noise_std},
          {"rate_curve", curve},
          {"min_valid_beams", c.min_valid_beams},
          {"seed", c.seed}};
}

BarometerConfig barometerConfigFromJson(const json& j) {
  requireObject(j, "barometer");
  BarometerConfig c;
  const std::string p = "barometer.";
  read(j, "atmospheric_pressure", c.atmospheric_pressure, p);
  read(j, "water_density", c.water_density, p);
  read(j, "gravity", c.gravity, p);
  read(j, "noise_std", c.noise_std, p);
  read(j, "seed", c.seed, p);
  c.validate();
  return c;
}

json barometerConfigToJson(const BarometerConfig& c) {
  return {{"atmospheric_pressure", c.atmospheric_pressure},
          {"water_density", c.water_density},
          {"gravity", c.gravity},
          {"noise_std", c.noise_std},
          {"seed", c.seed}};
}

} // namespace marisim
