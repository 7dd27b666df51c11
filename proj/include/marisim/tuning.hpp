#pragma once

// Water-parameter tuning sessions. Each session caches one in-air RGB-D pair
// and re-applies the water model to it on every parameter update, so a
// preview never needs a new ray trace.

#include "marisim/camera.hpp"
#include "marisim/image.hpp"

#include "json.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace marisim {

struct SceneSource {
  std::filesystem::path scene_path;
  std::optional<std::filesystem::path> material_table_path;
  Pose pose;  // camera optical frame in the world
  CameraIntrinsics intrinsics{640, 480, 500.0, 500.0, 319.5, 239.5};
  LightConfig lighting;
  DepthConvention depth_convention = DepthConvention::Range;
};

struct SessionOptions {
  std::optional<WaterColumnParams> initial_params;  // "clear" preset when absent
  WaterEffectOptions water;
  std::optional<Image> reference;  // shown next to the preview by the UI
};

struct PreviewResult {
  std::string token;
  double latency_ms = 0.0;
  std::uint64_t hash = 0;
};

// Raised for invalid parameter updates. The message lists the offending
// fields; the session is left unchanged.
class ParamsRejected : public ConfigError {
 public:
  ParamsRejected(const std::string& what, std::vector<std::string> fields)
      : ConfigError(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

class SessionNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TuningSession {
 public:
  TuningSession(std::string id, ImagePair base, SessionOptions options);

  const std::string& id() const { return id_; }
  const ImagePair& base() const { return base_; }
  const WaterEffectOptions& waterOptions() const { return water_; }

  PreviewResult update(const WaterColumnParams& params);
  PreviewResult updateFromJson(const nlohmann::json& doc);

  WaterColumnParams params() const;
  std::string latestToken() const;
  // PNG of a retained preview; nullopt for unknown or evicted tokens.
  std::optional<std::vector<std::uint8_t>> previewPng(const std::string& token) const;
  std::optional<Image> previewImage(const std::string& token) const;
  std::optional<std::vector<std::uint8_t>> referencePng() const;

  // Writes the parameters current at call time. Returns their preview hash.
  std::uint64_t save(const std::filesystem::path& path) const;
  nlohmann::json state() const;

  static constexpr std::size_t kRetainedPreviews = 16;

 private:
  struct Preview {
    std::string token;
    Image image;
    mutable std::vector<std::uint8_t> png;  // encoded lazily
    std::uint64_t hash;
    WaterColumnParams params;
  };

  PreviewResult updateLocked(const WaterColumnParams& params);
  const Preview* findLocked(const std::string& token) const;

  const std::string id_;
  const ImagePair base_;
  const WaterEffectOptions water_;
  const std::optional<Image> reference_;

  mutable std::mutex mutex_;
  WaterColumnParams params_;
  std::uint64_t counter_ = 0;
  std::deque<Preview> previews_;
};

class TuningService {
 public:
  std::shared_ptr<TuningSession> createFromScene(const SceneSource& source, SessionOptions options = {});
  std::shared_ptr<TuningSession> createFromPair(ImagePair pair, SessionOptions options = {});
  std::shared_ptr<TuningSession> session(const std::string& id) const;  // throws SessionNotFound
  std::size_t sessionCount() const;

 private:
  std::shared_ptr<TuningSession> add(ImagePair pair, SessionOptions options);

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<TuningSession>> sessions_;
  std::uint64_t next_id_ = 1;
};

// Session request bodies used by the HTTP front end.
//   {"scene": path, "materials"?: path, "pose"?: {...}, "intrinsics"?: {...},
//    "lighting"?: {...}, "depth_convention"?: "range"|"planar_z", ...}
//   {"pair": {"width", "height", "rgb": [r,g,b,...], "depth": [...]}, ...}
// Both accept "params" (water params object or preset name), "no_hit_range"
// (number or null) and "reference" (PNG path).
std::shared_ptr<TuningSession> createSessionFromJson(TuningService& service, const nlohmann::json& request);

// JSON update message parser. Collects every invalid field before throwing.
WaterColumnParams parseParamsUpdate(const nlohmann::json& doc, const WaterColumnParams& current);

} // namespace marisim
