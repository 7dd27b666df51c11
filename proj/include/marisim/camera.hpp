#pragma once

#include "marisim/common.hpp"
#include "marisim/image.hpp"
#include "marisim/scene.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace marisim {

// Pinhole intrinsics. Pixel centers sit at integer coordinates, so a centered
// principal point is ((width-1)/2, (height-1)/2). Camera frame: x right,
// y down, z forward.
struct CameraIntrinsics {
  int width = 640;
  int height = 480;
  double fx = 500.0;
  double fy = 500.0;
  double cx = 319.5;
  double cy = 239.5;

  void validate() const;
  static CameraIntrinsics fromHorizontalFov(int width, int height, double hfov_deg);
  Vec3 rayDirection(int u, int v) const;  // unit, camera frame
};

enum class DepthConvention { Range, PlanarZ };

struct LightConfig {
  Vec3 direction{0.0, 0.0, -1.0};  // world-frame direction the light travels
  double directional = 0.8;
  double ambient = 0.2;
  Rgb background{0.0, 0.0, 0.0};
};

// In-air render: rgb is H x W x 3 in [0,1]; depth is H x W, 0 where nothing was hit.
struct ImagePair {
  Image rgb;
  Image depth;

  // Throws ConfigError naming both shapes on mismatch.
  void validate() const;
};

// Per-channel water-column coefficients (R, G, B).
struct WaterColumnParams {
  Rgb beta_attn{0.0, 0.0, 0.0};  // 1/m
  Rgb beta_bs{0.0, 0.0, 0.0};    // 1/m
  Rgb B_inf{0.0, 0.0, 0.0};      // veiling light

  // Throws ConfigError naming the field, e.g. "beta_attn.R".
  void validate() const;
  bool operator==(const WaterColumnParams&) const = default;

  static WaterColumnParams preset(const std::string& name);
  static std::vector<std::string> presetNames();
};

struct WaterEffectOptions {
  // Range substituted for no-hit pixels (depth == 0). Disabled means depth 0
  // is taken literally, which leaves those pixels untouched.
  std::optional<double> no_hit_range = 50.0;
  unsigned workers = 0;
};

ImagePair renderInAir(const Scene& scene, const Pose& pose, const CameraIntrinsics& intrinsics,
                      const LightConfig& lighting = {}, DepthConvention depth = DepthConvention::Range,
                      unsigned workers = 0);

// Attenuation plus backscatter for one channel value.
double waterColumnChannel(double in_air, double range, double beta_attn, double beta_bs, double veiling);

Image applyWaterEffects(const ImagePair& pair, const WaterColumnParams& params, const WaterEffectOptions& options = {});

WaterColumnParams waterParamsFromJsonText(const std::string& text);
std::string waterParamsToJsonText(const WaterColumnParams& params);
WaterColumnParams loadWaterParams(const std::filesystem::path& path);
void saveWaterParams(const WaterColumnParams& params, const std::filesystem::path& path);

} // namespace marisim
