#include "marisim/sdg.hpp"

#include "marisim/config_json.hpp"
#include "marisim/image.hpp"
#include "marisim/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace marisim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTimeTolerance = 1e-9;
const char* const kTrajectoryHeader = "t,x,y,z,qw,qx,qy,qz,vx,vy,vz";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string readText(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(std::string("cannot open ") + what + " " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shortest round-trip representation keeps CSV output exact and stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string frameName(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.%s", index, ext);
  return buf;
}

Pose compose(const Pose& body, const Pose& mount) {
  Pose out;
  out.position = body.position + body.orientation * mount.position;
  out.orientation = (body.orientation * mount.orientation).normalized();
  return out;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
void readField(const json& j, const char* key, T& out, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key + ": wrong type");
  }
}

void checkRate(double rate, const char* field) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError(std::string(field) + " must be > 0");
}

// Writes files under the output root and remembers them for the manifest.
class DatasetWriter {
 public:
  explicit DatasetWriter(fs::path root) : root_(std::move(root)) {}

  fs::path path(const fs::path& rel) const { return root_ / rel; }

  void png(const fs::path& rel, const Image& image) {
    writePng(root_ / rel, image);
    add(rel);
  }
  void depth(const fs::path& rel, const Image& image) {
    writeDepthRaw(root_ / rel, image);
    add(rel);
  }
  void polarCsv(const fs::path& rel, const PolarGrid& grid) {
    writePolarCsv(root_ / rel, grid);
    add(rel);
  }
  void text(const fs::path& rel, const std::string& body) {
    std::ofstream out(root_ / rel, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (root_ / rel).string());
    out << body;
    if (!out) throw std::runtime_error("write failed: " + (root_ / rel).string());
    add(rel);
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  void add(const fs::path& rel) { files_.push_back(rel); }

  fs::path root_;
  std::vector<fs::path> files_;
};

void prepareOutputDir(const fs::path& root, bool overwrite) {
  std::error_code ec;
  if (fs::exists(root, ec)) {
    if (!fs::is_directory(root, ec)) throw std::runtime_error("output path is not a directory: " + root.string());
    if (!fs::is_empty(root, ec)) {
      if (!overwrite) {
        throw std::runtime_error("output directory is not empty: " + root.string() + " (use overwrite to replace)");
      }
      // Only our own layout is removed; anything else would break manifest
      // completeness, so refuse instead of deleting it.
      const std::set<std::string> ours = {"camera", "sonar", "dvl", "baro", "manifest.json"};
      for (const auto& entry : fs::directory_iterator(root)) {
        if (!ours.count(entry.path().filename().string())) {
          throw std::runtime_error("output directory contains foreign entry " + entry.path().string());
        }
      }
      for (const auto& name : ours) fs::remove_all(root / name);
    }
  }
  fs::create_directories(root, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + root.string() + ": " + ec.message());

  const fs::path probe = root / ".write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out) throw std::runtime_error("output directory is not writable: " + root.string());
  }
  fs::remove(probe, ec);
}

struct Plan {
  std::vector<double> camera_times;
  std::vector<double> sonar_times;
  std::vector<double> baro_times;
  double start = 0.0;
  double end = 0.0;
  bool dvl = false;
};

std::string fileList(const std::vector<fs::path>& files) {
  std::string out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (i) out += ',';
    out += files[i].generic_string();
  }
  return out;
}

json pathsJson(const std::vector<fs::path>& files) {
  json arr = json::array();
  for (const auto& f : files) arr.push_back(f.generic_string());
  return arr;
}

RunSummary execute(const SimConfig& config, const Plan& plan,
                   const std::function<TrajectorySample(double)>& state_at, const json& trajectory_info,
                   const RunOptions& options) {
  config.validate();
  std::optional<MaterialTable> table;
  if (config.material_table_path) table = MaterialTable::load(*config.material_table_path);
  const Scene scene = loadScene(config.scene_path, table ? *table : MaterialTable{});

  prepareOutputDir(config.output_dir, options.overwrite);
  DatasetWriter out(config.output_dir);
  RunSummary summary;
  json frames = json::array();

  const std::uint64_t sonar_seed = rng::streamSeed(config.seed, "sonar");
  const std::uint64_t dvl_seed = rng::streamSeed(config.seed, "dvl");
  const std::uint64_t baro_seed = rng::streamSeed(config.seed, "barometer");

  if (config.camera.enabled && !plan.camera_times.empty()) {
    for (const char* sub : {"camera/rgb", "camera/depth", "camera/underwater"}) fs::create_directories(out.path(sub));
    std::string index = "frame,t,rgb,depth,underwater\n";
    WaterEffectOptions water_opts;
    water_opts.no_hit_range = config.camera.no_hit_range > 0.0 ? std::optional<double>(config.camera.no_hit_range)
                                                                : std::nullopt;
    water_opts.workers = config.workers;
    for (std::size_t k = 0; k < plan.camera_times.size(); ++k) {
      const double t = plan.camera_times[k];
      const Pose pose = compose(state_at(t).pose, config.camera.mount);
      const ImagePair pair = renderInAir(scene, pose, config.camera.intrinsics, config.camera.lighting,
                                         config.camera.depth_convention, config.workers);
      const Image under = applyWaterEffects(pair, config.camera.water, water_opts);
      const fs::path rgb = fs::path("camera/rgb") / frameName(k, "png");
      const fs::path depth = fs::path("camera/depth") / frameName(k, "bin");
      const fs::path uw = fs::path("camera/underwater") / frameName(k, "png");
      out.png(rgb, pair.rgb);
      out.depth(depth, pair.depth);
      out.png(uw, under);
      index += std::to_string(k) + "," + num(t) + "," + rgb.generic_string() + "," + depth.generic_string() + "," +
               uw.generic_string() + "\n";
      frames.push_back({{"t", t}, {"sensor", "camera"}, {"index", k},
                        {"files", pathsJson({rgb, depth, uw})}});
    }
    out.text("camera/index.csv", index);
    summary.camera_frames = plan.camera_times.size();
  }

  if (config.sonar.enabled && !plan.sonar_times.empty()) {
    fs::create_directories(out.path("sonar/polar"));
    fs::create_directories(out.path("sonar/fan"));
    SonarConfig sc = config.sonar.sonar;
    sc.seed = sonar_seed;
    sc.workers = config.workers;
    std::string index = "frame,t,polar_png,polar_csv,fan_png\n";
    for (std::size_t k = 0; k < plan.sonar_times.size(); ++k) {
      const double t = plan.sonar_times[k];
      const Pose pose = compose(state_at(t).pose, config.sonar.mount);
      const PolarGrid grid = renderSonar(scene, pose, sc, k);
      const fs::path png = fs::path("sonar/polar") / frameName(k, "png");
      const fs::path csv = fs::path("sonar/polar") / frameName(k, "csv");
      const fs::path fan = fs::path("sonar/fan") / frameName(k, "png");
      out.png(png, polarGridImage(grid));
      out.polarCsv(csv, grid);
      out.png(fan, projectFanImage(grid, sc, config.sonar.fan_width, config.sonar.fan_height));
      index += std::to_string(k) + "," + num(t) + "," + fileList({png, csv, fan}) + "\n";
      frames.push_back({{"t", t}, {"sensor", "sonar"}, {"index", k}, {"files", pathsJson({png, csv, fan})}});
    }
    out.text("sonar/index.csv", index);
    summary.sonar_frames = plan.sonar_times.size();
  }

  if (config.dvl.enabled && plan.dvl) {
    fs::create_directories(out.path("dvl"));
    DvlConfig dc = config.dvl.dvl;
    dc.seed = dvl_seed;
    const Quat sensor_from_body = config.dvl.mount.orientation.conjugate();
    std::string csv = "sample,t,valid,vx,vy,vz,r0,r1,r2,r3,b0,b1,b2,b3,next_interval\n";
    double t = plan.start;
    std::uint64_t k = 0;
    while (t <= plan.end + kTimeTolerance) {
      const TrajectorySample s = state_at(std::min(t, plan.end));
      const Pose pose = compose(s.pose, config.dvl.mount);
      const DvlMeasurement m = sampleDvl(scene, pose, sensor_from_body * s.velocity, dc, t, k);
      std::string row = std::to_string(k) + "," + num(t) + "," + (m.valid ? "1" : "0");
      for (int a = 0; a < 3; ++a) row += "," + (m.valid ? num(m.velocity[a]) : std::string());
      for (double r : m.beam_ranges) row += "," + num(r);
      for (bool b : m.beam_valid) row += b ? ",1" : ",0";
      row += "," + num(m.next_interval) + "\n";
      csv += row;

      json frame = {{"t", t},
                    {"sensor", "dvl"},
                    {"index", k},
                    {"file", "dvl/dvl.csv"},
                    {"valid", m.valid},
                    {"beam_ranges", m.beam_ranges},
                    {"beam_valid", m.beam_valid},
                    {"next_interval", m.next_interval}};
      frame["velocity"] = m.valid ? json{m.velocity.x(), m.velocity.y(), m.velocity.z()} : json(nullptr);
      frames.push_back(std::move(frame));

      ++summary.dvl_samples;
      if (!m.valid) ++summary.dvl_invalid;
      ++k;
      t = m.timestamp + m.next_interval;
    }
    out.text("dvl/dvl.csv", csv);
  }

  if (config.barometer.enabled && !plan.baro_times.empty()) {
    fs::create_directories(out.path("baro"));
    BarometerConfig bc = config.barometer.barometer;
    bc.seed = baro_seed;
    std::string csv = "sample,t,depth,pressure\n";
    for (std::size_t k = 0; k < plan.baro_times.size(); ++k) {
      const double t = plan.baro_times[k];
      const double depth = std::max(0.0, config.barometer.surface_z - state_at(t).pose.position.z());
      const double p = sampleBarometer(depth, bc, k);
      csv += std::to_string(k) + "," + num(t) + "," + num(depth) + "," + num(p) + "\n";
      frames.push_back({{"t", t}, {"sensor", "barometer"}, {"index", k}, {"file", "baro/baro.csv"},
                        {"depth", depth}, {"pressure", p}});
    }
    out.text("baro/baro.csv", csv);
    summary.barometer_samples = plan.baro_times.size();
  }

  json cfg = config.toJson();
  cfg.erase("output_dir");
  const auto wall = std::chrono::system_clock::now().time_since_epoch();
  json manifest = {{"format", "marisim-dataset-1"},
                   {"seed", config.seed},
                   {"sensor_seeds", {{"sonar", sonar_seed}, {"dvl", dvl_seed}, {"barometer", baro_seed}}},
                   {"config", cfg},
                   {"trajectory", trajectory_info},
                   {"frames", frames},
                   {"files", pathsJson(out.files())},
                   {"wall_clock_unix", std::chrono::duration<double>(wall).count()}};
  {
    std::ofstream mf(out.path("manifest.json"), std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot write manifest");
    mf << manifest.dump(2) << "\n";
  }
  summary.files = out.files();
  summary.files.push_back("manifest.json");
  return summary;
}

} // namespace

void Trajectory::validate() const {
  if (samples.empty()) throw ConfigError("trajectory: at least one sample is required");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t)) throw ConfigError("trajectory sample " + std::to_string(i) + ": non-finite timestamp");
    if (i > 0 && !(s.t > samples[i - 1].t)) {
      throw ConfigError("trajectory sample " + std::to_string(i) + ": timestamps must be strictly increasing");
    }
    try {
      s.pose.validate();
    } catch (const std::exception& e) {
      throw ConfigError("trajectory sample " + std::to_string(i) + ": " + e.what());
    }
    if (!s.pose.position.allFinite() || !s.velocity.allFinite()) {
      throw ConfigError("trajectory sample " + std::to_string(i) + ": non-finite value");
    }
  }
}

Trajectory Trajectory::fromCsvText(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  Trajectory traj;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != kTrajectoryHeader) {
        throw LoadError(std::string("trajectory: expected header \"") + kTrajectoryHeader + "\"");
      }
      header_seen = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        const std::string c = trim(cell);
        v.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw LoadError("trajectory line " + std::to_string(line_no) + ": bad number \"" + cell + "\"");
      }
    }
    if (v.size() != 11) {
      throw LoadError("trajectory line " + std::to_string(line_no) + ": expected 11 columns, got " +
                      std::to_string(v.size()));
    }
    TrajectorySample s;
    s.t = v[0];
    s.pose.position = Vec3(v[1], v[2], v[3]);
    Quat q(v[4], v[5], v[6], v[7]);
    if (std::abs(q.norm() - 1.0) > 1e-3) {
      throw LoadError("trajectory line " + std::to_string(line_no) + ": quaternion is not unit length");
    }
    s.pose.orientation = q.normalized();
    s.velocity = Vec3(v[8], v[9], v[10]);
    traj.samples.push_back(s);
  }
  if (!header_seen) throw LoadError("trajectory: empty file");
  try {
    traj.validate();
  } catch (const ConfigError& e) {
    throw LoadError(e.what());
  }
  return traj;
}

Trajectory Trajectory::loadCsv(const fs::path& path) { return fromCsvText(readText(path, "trajectory")); }

TrajectorySample interpolatePose(const Trajectory& traj, double t) {
  if (traj.samples.empty()) throw std::out_of_range("interpolatePose: empty trajectory");
  if (!(t >= traj.start() && t <= traj.end())) {
    throw std::out_of_range("interpolatePose: t=" + num(t) + " outside [" + num(traj.start()) + ", " +
                            num(traj.end()) + "]");
  }
  const auto& s = traj.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const TrajectorySample& a, double v) { return a.t < v; });
  if (it->t == t) return *it;
  const TrajectorySample& b = *it;
  const TrajectorySample& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  TrajectorySample out;
  out.t = t;
  out.pose.position = a.pose.position + u * (b.pose.position - a.pose.position);
  out.pose.orientation = a.pose.orientation.slerp(u, b.pose.orientation).normalized();
  out.velocity = a.velocity + u * (b.velocity - a.velocity);
  return out;
}

Pose forwardCameraMount() {
  // Columns are the optical axes expressed in the body frame.
  Eigen::Matrix3d r;
  r.col(0) = -Vec3::UnitY();  // image right = body right
  r.col(1) = -Vec3::UnitZ();  // image down = body down
  r.col(2) = Vec3::UnitX();   // optical axis = body forward
  return {Vec3::Zero(), Quat(r)};
}

std::vector<double> fixedRateTimes(double start, double end, double rate_hz) {
  checkRate(rate_hz, "rate_hz");
  if (end < start) throw ContractViolation("fixedRateTimes: end < start");
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = start + static_cast<double>(k) / rate_hz;
    if (t > end + kTimeTolerance) break;
    times.push_back(t);
  }
  return times;
}

SimConfig SimConfig::fromJson(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  SimConfig c;
  if (!doc.contains("scene")) throw ConfigError("config: missing field \"scene\"");
  std::string scene;
  readField(doc, "scene", scene, "");
  c.scene_path = resolve(scene, base_dir);
  if (doc.contains("materials")) {
    std::string p;
    readField(doc, "materials", p, "");
    c.material_table_path = resolve(p, base_dir);
  }
  if (doc.contains("trajectory")) {
    std::string p;
    readField(doc, "trajectory", p, "");
    c.trajectory_path = resolve(p, base_dir);
  }
  if (doc.contains("pose")) c.pose = poseFromJson(doc["pose"]);
  if (doc.contains("output_dir")) {
    std::string p;
    readField(doc, "output_dir", p, "");
    c.output_dir = resolve(p, base_dir);
  }
  readField(doc, "seed", c.seed, "");
  readField(doc, "workers", c.workers, "");

  if (doc.contains("camera")) {
    const json& j = doc["camera"];
    if (!j.is_object()) throw ConfigError("camera: expected a JSON object");
    readField(j, "enabled", c.camera.enabled, "camera.");
    readField(j, "rate_hz", c.camera.rate_hz, "camera.");
    if (j.contains("intrinsics")) c.camera.intrinsics = intrinsicsFromJson(j["intrinsics"]);
    if (j.contains("lighting")) c.camera.lighting = lightingFromJson(j["lighting"]);
    if (j.contains("water")) {
      const json& w = j["water"];
      c.camera.water = w.is_string() ? WaterColumnParams::preset(w.get<std::string>()) : waterParamsFromJson(w);
    }
    if (j.contains("depth_convention")) {
      const std::string d = j["depth_convention"].is_string() ? j["depth_convention"].get<std::string>() : "";
      if (d == "range") c.camera.depth_convention = DepthConvention::Range;
      else if (d == "planar_z") c.camera.depth_convention = DepthConvention::PlanarZ;
      else throw ConfigError("camera.depth_convention must be \"range\" or \"planar_z\"");
    }
    if (j.contains("no_hit_range")) {
      if (j["no_hit_range"].is_null()) c.camera.no_hit_range = 0.0;  // disabled
      else readField(j, "no_hit_range", c.camera.no_hit_range, "camera.");
    }
    if (j.contains("mount")) c.camera.mount = poseFromJson(j["mount"]);
  }
  if (doc.contains("sonar")) {
    const json& j = doc["sonar"];
    if (!j.is_object()) throw ConfigError("sonar: expected a JSON object");
    readField(j, "enabled", c.sonar.enabled, "sonar.");
    readField(j, "rate_hz", c.sonar.rate_hz, "sonar.");
    readField(j, "fan_width", c.sonar.fan_width, "sonar.");
    readField(j, "fan_height", c.sonar.fan_height, "sonar.");
    if (j.contains("mount")) c.sonar.mount = poseFromJson(j["mount"]);
    c.sonar.sonar = sonarConfigFromJson(j);
  }
  if (doc.contains("dvl")) {
    const json& j = doc["dvl"];
    if (!j.is_object()) throw ConfigError("dvl: expected a JSON object");
    readField(j, "enabled", c.dvl.enabled, "dvl.");
    if (j.contains("mount")) c.dvl.mount = poseFromJson(j["mount"]);
    c.dvl.dvl = dvlConfigFromJson(j);
  }
  if (doc.contains("barometer")) {
    const json& j = doc["barometer"];
    if (!j.is_object()) throw ConfigError("barometer: expected a JSON object");
    readField(j, "enabled", c.barometer.enabled, "barometer.");
    readField(j, "rate_hz", c.barometer.rate_hz, "barometer.");
    readField(j, "surface_z", c.barometer.surface_z, "barometer.");
    c.barometer.barometer = barometerConfigFromJson(j);
  }
  c.validate();
  return c;
}

SimConfig SimConfig::load(const fs::path& path) {
  const std::string text = readText(path, "config");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return fromJson(doc, path.parent_path());
}

json SimConfig::toJson() const {
  json doc;
  doc["scene"] = scene_path.generic_string();
  if (material_table_path) doc["materials"] = material_table_path->generic_string();
  if (trajectory_path) doc["trajectory"] = trajectory_path->generic_string();
  doc["pose"] = poseToJson(pose);
  doc["output_dir"] = output_dir.generic_string();
  doc["seed"] = seed;
  doc["workers"] = workers;

  json cam = {{"enabled", camera.enabled},
              {"rate_hz", camera.rate_hz},
              {"intrinsics", intrinsicsToJson(camera.intrinsics)},
              {"lighting", lightingToJson(camera.lighting)},
              {"water", waterParamsToJson(camera.water)},
              {"depth_convention", camera.depth_convention == DepthConvention::Range ? "range" : "planar_z"},
              {"mount", poseToJson(camera.mount)}};
  cam["no_hit_range"] = camera.no_hit_range > 0.0 ? json(camera.no_hit_range) : json(nullptr);
  doc["camera"] = cam;

  json son = sonarConfigToJson(sonar.sonar);
  son["enabled"] = sonar.enabled;
  son["rate_hz"] = sonar.rate_hz;
  son["fan_width"] = sonar.fan_width;
  son["fan_height"] = sonar.fan_height;
  son["mount"] = poseToJson(sonar.mount);
  doc["sonar"] = son;

  json dvl_doc = dvlConfigToJson(dvl.dvl);
  dvl_doc["enabled"] = dvl.enabled;
  dvl_doc["mount"] = poseToJson(dvl.mount);
  doc["dvl"] = dvl_doc;

  json baro = barometerConfigToJson(barometer.barometer);
  baro["enabled"] = barometer.enabled;
  baro["rate_hz"] = barometer.rate_hz;
  baro["surface_z"] = barometer.surface_z;
  doc["barometer"] = baro;
  return doc;
}

void SimConfig::validate() const {
  if (scene_path.empty()) throw ConfigError("config: scene path is empty");
  if (!fs::exists(scene_path)) throw LoadError("scene file not found: " + scene_path.string());
  if (material_table_path && !fs::exists(*material_table_path)) {
    throw LoadError("material table not found: " + material_table_path->string());
  }
  if (trajectory_path && !fs::exists(*trajectory_path)) {
    throw LoadError("trajectory file not found: " + trajectory_path->string());
  }
  pose.validate();
  checkRate(camera.rate_hz, "camera.rate_hz");
  checkRate(sonar.rate_hz, "sonar.rate_hz");
  checkRate(barometer.rate_hz, "barometer.rate_hz");
  camera.intrinsics.validate();
  camera.water.validate();
  camera.mount.validate();
  if (!(camera.no_hit_range >= 0.0) || !std::isfinite(camera.no_hit_range)) {
    throw ConfigError("camera.no_hit_range must be finite and >= 0");
  }
  sonar.sonar.validate();
  sonar.mount.validate();
  if (sonar.fan_width < 1 || sonar.fan_height < 1) throw ConfigError("sonar fan image size must be >= 1");
  dvl.dvl.validate();
  dvl.mount.validate();
  barometer.barometer.validate();
  if (!std::isfinite(barometer.surface_z)) throw ConfigError("barometer.surface_z must be finite");
}

RunSummary runSimulation(const SimConfig& config, const Trajectory& traj, const RunOptions& options) {
  traj.validate();
  Plan plan;
  plan.start = traj.start();
  plan.end = traj.end();
  if (config.camera.enabled) plan.camera_times = fixedRateTimes(plan.start, plan.end, config.camera.rate_hz);
  if (config.sonar.enabled) plan.sonar_times = fixedRateTimes(plan.start, plan.end, config.sonar.rate_hz);
  if (config.barometer.enabled) plan.baro_times = fixedRateTimes(plan.start, plan.end, config.barometer.rate_hz);
  plan.dvl = config.dvl.enabled;
  json info = {{"samples", traj.samples.size()}, {"start", plan.start}, {"end", plan.end}};
  if (config.trajectory_path) info["path"] = config.trajectory_path->generic_string();
  return execute(config, plan, [&](double t) { return interpolatePose(traj, t); }, info, options);
}

RunSummary renderSingleFrame(const SimConfig& config, const Pose& body_pose, const RunOptions& options) {
  body_pose.validate();
  Plan plan;
  if (config.camera.enabled) plan.camera_times = {0.0};
  if (config.sonar.enabled) plan.sonar_times = {0.0};
  if (config.barometer.enabled) plan.baro_times = {0.0};
  // A single DVL ping: end < start + next_interval stops the loop.
  plan.dvl = config.dvl.enabled;
  const TrajectorySample fixed{0.0, body_pose, Vec3::Zero()};
  json info = {{"samples", 1}, {"start", 0.0}, {"end", 0.0}, {"pose", poseToJson(body_pose)}};
  return execute(config, plan, [&](double) { return fixed; }, info, options);
}

} // namespace marisim
