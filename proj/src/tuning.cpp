#include "marisim/tuning.hpp"

#include "marisim/config_json.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace marisim {

using nlohmann::json;

namespace {

constexpr const char* kChannels[3] = {"R", "G", "B"};

std::string joinFields(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ", ";
    out += fields[i];
  }
  return out;
}

} // namespace

WaterColumnParams parseParamsUpdate(const json& doc, const WaterColumnParams& current) {
  if (!doc.is_object()) throw ParamsRejected("params update must be a JSON object", {});
  WaterColumnParams next = current;
  std::vector<std::string> bad;

  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) {
      bad.push_back("preset");
    } else {
      try {
        next = WaterColumnParams::preset(doc["preset"].get<std::string>());
      } catch (const ConfigError&) {
        bad.push_back("preset");
      }
    }
  }

  const std::pair<const char*, Rgb*> fields[] = {
      {"beta_attn", &next.beta_attn}, {"beta_bs", &next.beta_bs}, {"B_inf", &next.B_inf}};
  static const std::set<std::string> known = {"preset", "beta_attn", "beta_bs", "B_inf", "seq"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) bad.push_back(key);
  }
  for (const auto& [name, target] : fields) {
    if (!doc.contains(name)) continue;
    const json& v = doc[name];
    if (!v.is_array() || v.size() != 3) {
      bad.push_back(name);
      continue;
    }
    const bool unit = std::string(name) == "B_inf";
    for (int c = 0; c < 3; ++c) {
      const bool ok = v[c].is_number() && std::isfinite(v[c].get<double>()) && v[c].get<double>() >= 0.0 &&
                      (!unit || v[c].get<double>() <= 1.0);
      if (ok) (*target)[c] = v[c].get<double>();
      else bad.push_back(std::string(name) + "." + kChannels[c]);
    }
  }
  if (!bad.empty()) throw ParamsRejected("invalid params: " + joinFields(bad), bad);
  next.validate();
  return next;
}

TuningSession::TuningSession(std::string id, ImagePair base, SessionOptions options)
    : id_(std::move(id)),
      base_(std::move(base)),
      water_(options.water),
      reference_(std::move(options.reference)),
      params_(options.initial_params.value_or(WaterColumnParams::preset("clear"))) {
  base_.validate();
  params_.validate();
  std::lock_guard lock(mutex_);
  updateLocked(params_);
}

PreviewResult TuningSession::update(const WaterColumnParams& params) {
  try {
    params.validate();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    throw ParamsRejected(msg, {msg.substr(0, msg.find(' '))});
  }
  std::lock_guard lock(mutex_);
  return updateLocked(params);
}

PreviewResult TuningSession::updateFromJson(const json& doc) {
  std::lock_guard lock(mutex_);
  return updateLocked(parseParamsUpdate(doc, params_));
}

PreviewResult TuningSession::updateLocked(const WaterColumnParams& params) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Image image = applyWaterEffects(base_, params, water_);
  const double latency = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

  Preview p{id_ + "-" + std::to_string(++counter_), std::move(image), {}, 0, params};
  p.hash = imageHash(p.image);
  PreviewResult result{p.token, latency, p.hash};
  params_ = params;
  previews_.push_back(std::move(p));
  while (previews_.size() > kRetainedPreviews) previews_.pop_front();
  return result;
}

const TuningSession::Preview* TuningSession::findLocked(const std::string& token) const {
  if (previews_.empty()) return nullptr;
  if (token.empty() || token == "latest") return &previews_.back();
  for (const auto& p : previews_) {
    if (p.token == token) return &p;
  }
  return nullptr;
}

WaterColumnParams TuningSession::params() const {
  std::lock_guard lock(mutex_);
  return params_;
}

std::string TuningSession::latestToken() const {
  std::lock_guard lock(mutex_);
  return previews_.empty() ? std::string() : previews_.back().token;
}

std::optional<std::vector<std::uint8_t>> TuningSession::previewPng(const std::string& token) const {
  std::lock_guard lock(mutex_);
  const Preview* p = findLocked(token);
  if (!p) return std::nullopt;
  if (p->png.empty()) p->png = encodePng(p->image);
  return p->png;
}

std::optional<Image> TuningSession::previewImage(const std::string& token) const {
  std::lock_guard lock(mutex_);
  const Preview* p = findLocked(token);
  if (!p) return std::nullopt;
  return p->image;
}

std::optional<std::vector<std::uint8_t>> TuningSession::referencePng() const {
  if (!reference_) return std::nullopt;
  return encodePng(*reference_);
}

std::uint64_t TuningSession::save(const std::filesystem::path& path) const {
  WaterColumnParams snapshot;
  std::uint64_t hash = 0;
  {
    std::lock_guard lock(mutex_);
    snapshot = params_;
    hash = previews_.back().hash;
  }
  saveWaterParams(snapshot, path);
  return hash;
}

json TuningSession::state() const {
  std::lock_guard lock(mutex_);
  json doc = waterParamsToJson(params_);
  return {{"session_id", id_},
          {"width", base_.rgb.width()},
          {"height", base_.rgb.height()},
          {"params", doc},
          {"preview_token", previews_.back().token},
          {"preview_hash", std::to_string(previews_.back().hash)},
          {"has_reference", reference_.has_value()}};
}

std::shared_ptr<TuningSession> TuningService::createFromScene(const SceneSource& source, SessionOptions options) {
  std::optional<MaterialTable> table;
  if (source.material_table_path) table = MaterialTable::load(*source.material_table_path);
  const Scene scene = loadScene(source.scene_path, table ? *table : MaterialTable{});
  ImagePair pair = renderInAir(scene, source.pose, source.intrinsics, source.lighting, source.depth_convention,
                               options.water.workers);
  return add(std::move(pair), std::move(options));
}

std::shared_ptr<TuningSession> TuningService::createFromPair(ImagePair pair, SessionOptions options) {
  return add(std::move(pair), std::move(options));
}

std::shared_ptr<TuningSession> TuningService::add(ImagePair pair, SessionOptions options) {
  std::string id;
  {
    std::unique_lock lock(mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  // Rendering the first preview happens outside the registry lock.
  auto session = std::make_shared<TuningSession>(id, std::move(pair), std::move(options));
  std::unique_lock lock(mutex_);
  sessions_[id] = session;
  return session;
}

std::shared_ptr<TuningSession> TuningService::session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session \"" + id + "\"");
  return it->second;
}

std::size_t TuningService::sessionCount() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

namespace {

ImagePair pairFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("pair: expected a JSON object");
  int width = 0;
  int height = 0;
  try {
    width = j.at("width").get<int>();
    height = j.at("height").get<int>();
  } catch (const json::exception&) {
    throw ConfigError("pair: width and height are required integers");
  }
  if (width < 1 || height < 1) throw ConfigError("pair: width and height must be >= 1");
  const json& rgb = j.contains("rgb") ? j["rgb"] : json::array();
  const json& depth = j.contains("depth") ? j["depth"] : json::array();
  if (!rgb.is_array() || !depth.is_array()) throw ConfigError("pair: rgb and depth must be arrays");

  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  if (rgb.size() != 3 * pixels || depth.size() != pixels) {
    throw ConfigError("image pair shape mismatch: rgb " + std::to_string(rgb.size()) + " values vs depth " +
                      std::to_string(depth.size()) + " values for declared " + std::to_string(width) + "x" +
                      std::to_string(height) + " (expected " + std::to_string(3 * pixels) + " and " +
                      std::to_string(pixels) + ")");
  }
  auto fill = [&](const json& src, int channels, const char* what) {
    Image im(width, height, channels);
    auto data = im.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (!src[i].is_number()) throw ConfigError(std::string("pair: ") + what + " must contain numbers");
      data[i] = src[i].get<float>();
    }
    return im;
  };
  ImagePair pair{fill(rgb, 3, "rgb"), fill(depth, 1, "depth")};
  pair.validate();
  return pair;
}

} // namespace

std::shared_ptr<TuningSession> createSessionFromJson(TuningService& service, const json& req) {
  if (!req.is_object()) throw ConfigError("session request: expected a JSON object");
  SessionOptions options;
  if (req.contains("params")) {
    const json& p = req["params"];
    options.initial_params = p.is_string() ? WaterColumnParams::preset(p.get<std::string>()) : waterParamsFromJson(p);
  }
  if (req.contains("no_hit_range")) {
    const json& n = req["no_hit_range"];
    if (n.is_null()) options.water.no_hit_range.reset();
    else if (n.is_number()) options.water.no_hit_range = n.get<double>();
    else throw ConfigError("no_hit_range must be a number or null");
  }
  if (req.contains("reference")) options.reference = readPng(req["reference"].get<std::string>());

  const bool has_scene = req.contains("scene");
  const bool has_pair = req.contains("pair");
  if (has_scene == has_pair) throw ConfigError("session request: give exactly one of \"scene\" or \"pair\"");
  if (has_pair) return service.createFromPair(pairFromJson(req["pair"]), std::move(options));

  SceneSource src;
  src.scene_path = req["scene"].get<std::string>();
  if (req.contains("materials")) src.material_table_path = req["materials"].get<std::string>();
  if (req.contains("pose")) src.pose = poseFromJson(req["pose"]);
  if (req.contains("intrinsics")) src.intrinsics = intrinsicsFromJson(req["intrinsics"]);
  if (req.contains("lighting")) src.lighting = lightingFromJson(req["lighting"]);
  if (req.contains("depth_convention")) {
    const std::string d = req["depth_convention"].get<std::string>();
    if (d == "range") src.depth_convention = DepthConvention::Range;
    else if (d == "planar_z") src.depth_convention = DepthConvention::PlanarZ;
    else throw ConfigError("depth_convention must be \"range\" or \"planar_z\"");
  }
  return service.createFromScene(src, std::move(options));
}

} // namespace marisim
