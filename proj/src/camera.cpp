#include "marisim/camera.hpp"

#include "marisim/config_json.hpp"
#include "marisim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace marisim {

using nlohmann::json;

namespace {

constexpr const char* kChannelNames[3] = {"R", "G", "B"};

// Authored water-type defaults, not measured values. Clear water attenuates
// red strongly and blue weakly; turbid water raises backscatter across the
// spectrum.
const std::map<std::string, WaterColumnParams>& presetTable() {
  static const std::map<std::string, WaterColumnParams> table = {
      {"clear", {{0.30, 0.05, 0.04}, {0.02, 0.03, 0.04}, {0.02, 0.20, 0.32}}},
      {"coastal", {{0.55, 0.20, 0.28}, {0.10, 0.14, 0.12}, {0.08, 0.32, 0.30}}},
      {"turbid", {{1.10, 0.75, 0.90}, {0.45, 0.50, 0.40}, {0.22, 0.38, 0.28}}},
  };
  return table;
}

Rgb parseTriple(const json& doc, const char* field) {
  const auto& v = doc.at(field);
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string(field) + " must be an array of 3 numbers");
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    if (!v[c].is_number()) throw ConfigError(std::string(field) + "." + kChannelNames[c] + " must be a number");
    out[c] = v[c].get<double>();
  }
  return out;
}

} // namespace

void CameraIntrinsics::validate() const {
  if (width < 1 || height < 1) throw ConfigError("intrinsics: width and height must be >= 1");
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: fx and fy must be positive");
  if (!(cx >= 0.0 && cx < width)) throw ConfigError("intrinsics.cx must be in [0, width)");
  if (!(cy >= 0.0 && cy < height)) throw ConfigError("intrinsics.cy must be in [0, height)");
}

CameraIntrinsics CameraIntrinsics::fromHorizontalFov(int width, int height, double hfov_deg) {
  const double f = 0.5 * width / std::tan(0.5 * deg2rad(hfov_deg));
  return {width, height, f, f, 0.5 * (width - 1), 0.5 * (height - 1)};
}

Vec3 CameraIntrinsics::rayDirection(int u, int v) const {
  return Vec3((u - cx) / fx, (v - cy) / fy, 1.0).normalized();
}

void ImagePair::validate() const {
  auto shape = [](const Image& im) {
    return std::to_string(im.width()) + "x" + std::to_string(im.height()) + "x" + std::to_string(im.channels());
  };
  if (rgb.channels() != 3 || depth.channels() != 1 || !rgb.sameShape(depth) || rgb.empty()) {
    throw ConfigError("image pair shape mismatch: rgb " + shape(rgb) + " vs depth " + shape(depth));
  }
  for (float v : rgb.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) throw ConfigError("image pair: rgb values must be finite in [0,1]");
  }
  for (float d : depth.data()) {
    if (!std::isfinite(d) || d < 0.0f) throw ConfigError("image pair: depth values must be finite and >= 0");
  }
}

void WaterColumnParams::validate() const {
  auto check = [](const Rgb& v, const char* field, bool unit_interval) {
    for (int c = 0; c < 3; ++c) {
      const std::string name = std::string(field) + "." + kChannelNames[c];
      if (!std::isfinite(v[c])) throw ConfigError(name + " must be finite");
      if (v[c] < 0.0) throw ConfigError(name + " must be >= 0");
      if (unit_interval && v[c] > 1.0) throw ConfigError(name + " must be <= 1");
    }
  };
  check(beta_attn, "beta_attn", false);
  check(beta_bs, "beta_bs", false);
  check(B_inf, "B_inf", true);
}

WaterColumnParams WaterColumnParams::preset(const std::string& name) {
  const auto& table = presetTable();
  auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown water preset \"" + name + "\"");
  return it->second;
}

std::vector<std::string> WaterColumnParams::presetNames() {
  std::vector<std::string> names;
  for (const auto& [name, _] : presetTable()) names.push_back(name);
  return names;
}

ImagePair renderInAir(const Scene& scene, const Pose& pose, const CameraIntrinsics& intrinsics,
                      const LightConfig& lighting, DepthConvention depth_convention, unsigned workers) {
  intrinsics.validate();
  pose.validate();
  ImagePair pair{Image(intrinsics.width, intrinsics.height, 3), Image(intrinsics.width, intrinsics.height, 1)};
  const Vec3 to_light = -lighting.direction.normalized();
  constexpr double kFar = 1e6;

  parallelFor(static_cast<std::size_t>(intrinsics.height), workers, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < intrinsics.width; ++u) {
      const Vec3 dir_cam = intrinsics.rayDirection(u, v);
      const RayHit hit = scene.castRay(pose.position, pose.rotate(dir_cam), kFar);
      if (!hit.hit) {
        for (int c = 0; c < 3; ++c) pair.rgb.at(u, v, c) = static_cast<float>(lighting.background[c]);
        pair.depth.at(u, v) = 0.0f;
        continue;
      }
      const double shade = lighting.ambient + lighting.directional * std::max(0.0, hit.normal.dot(to_light));
      for (int c = 0; c < 3; ++c) {
        pair.rgb.at(u, v, c) = static_cast<float>(std::clamp(hit.material.color[c] * shade, 0.0, 1.0));
      }
      const double d = depth_convention == DepthConvention::Range ? hit.range : hit.range * dir_cam.z();
      pair.depth.at(u, v) = static_cast<float>(d);
    }
  });
  return pair;
}

double waterColumnChannel(double in_air, double range, double beta_attn, double beta_bs, double veiling) {
  return in_air * std::exp(-beta_attn * range) + veiling * -std::expm1(-beta_bs * range);
}

Image applyWaterEffects(const ImagePair& pair, const WaterColumnParams& params, const WaterEffectOptions& options) {
  params.validate();
  pair.validate();
  if (options.no_hit_range && !(std::isfinite(*options.no_hit_range) && *options.no_hit_range >= 0.0)) {
    throw ConfigError("no_hit_range must be finite and >= 0");
  }
  const int width = pair.rgb.width();
  Image out(width, pair.rgb.height(), 3);
  parallelFor(static_cast<std::size_t>(pair.rgb.height()), options.workers, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < width; ++x) {
      double d = pair.depth.at(x, y);
      if (d == 0.0 && options.no_hit_range) d = *options.no_hit_range;
      for (int c = 0; c < 3; ++c) {
        const double v = waterColumnChannel(pair.rgb.at(x, y, c), d, params.beta_attn[c], params.beta_bs[c],
                                            params.B_inf[c]);
        out.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  });
  return out;
}

WaterColumnParams waterParamsFromJson(const json& doc) {
  if (!doc.is_object()) throw ConfigError("water params: expected a JSON object");
  WaterColumnParams params;
  const bool has_preset = doc.contains("preset");
  if (has_preset) {
    if (!doc["preset"].is_string()) throw ConfigError("preset must be a string");
    params = WaterColumnParams::preset(doc["preset"].get<std::string>());
  }
  const std::pair<const char*, Rgb*> fields[] = {
      {"beta_attn", &params.beta_attn}, {"beta_bs", &params.beta_bs}, {"B_inf", &params.B_inf}};
  for (const auto& [name, target] : fields) {
    if (doc.contains(name)) {
      *target = parseTriple(doc, name);
    } else if (!has_preset) {
      throw ConfigError(std::string("water params: missing field \"") + name + "\"");
    }
  }
  params.validate();
  return params;
}

json waterParamsToJson(const WaterColumnParams& params) {
  return {{"beta_attn", params.beta_attn}, {"beta_bs", params.beta_bs}, {"B_inf", params.B_inf}};
}

WaterColumnParams waterParamsFromJsonText(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("water params: ") + e.what());
  }
  return waterParamsFromJson(doc);
}

std::string waterParamsToJsonText(const WaterColumnParams& params) {
  return waterParamsToJson(params).dump(2) + "\n";
}

WaterColumnParams loadWaterParams(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open water params " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return waterParamsFromJsonText(ss.str());
}

void saveWaterParams(const WaterColumnParams& params, const std::filesystem::path& path) {
  params.validate();
  const std::string text = waterParamsToJsonText(params);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace marisim
