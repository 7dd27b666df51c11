#include "doctest.h"

#include "support.hpp"

#include "marisim/sdg.hpp"

#include "json.hpp"

#include <map>
#include <set>

using namespace marisim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kHeader = "t,x,y,z,qw,qx,qy,qz,vx,vy,vz\n";

// Floor 10 m below the start plus a box ahead of the vehicle.
std::string floorObj(double z) {
  std::string s = "o floor\n";
  s += "v -100 -100 " + std::to_string(z) + "\nv 100 -100 " + std::to_string(z) + "\n";
  s += "v 100 100 " + std::to_string(z) + "\nv -100 100 " + std::to_string(z) + "\n";
  s += "f 1 2 3\nf 1 3 4\n";
  s += "o box\nv 6 -1 -3\nv 8 -1 -3\nv 8 1 -3\nv 6 1 -3\nv 6 -1 0\nv 8 -1 0\nv 8 1 0\nv 6 1 0\n";
  s += "f 5 6 7\nf 5 7 8\nf 9 11 10\nf 9 12 11\nf 5 9 10\nf 5 10 6\nf 8 7 11\nf 8 11 12\nf 5 8 12\nf 5 12 9\n";
  return s;
}

std::string straightRun(double duration, double z = -2.0) {
  std::string s = kHeader;
  for (int k = 0; k <= 4; ++k) {
    const double t = duration * k / 4.0;
    s += std::to_string(t) + "," + std::to_string(t) + ",0," + std::to_string(z) + ",1,0,0,0,1,0,0\n";
  }
  return s;
}

SimConfig smallConfig(const testing::TempDir& dir, const std::string& out = "out") {
  SimConfig c;
  c.scene_path = dir / "scene.obj";
  c.output_dir = dir / out;
  c.seed = 21;
  c.camera.intrinsics = CameraIntrinsics::fromHorizontalFov(32, 24, 70.0);
  c.camera.rate_hz = 10.0;
  c.sonar.rate_hz = 5.0;
  c.sonar.sonar.rays_azimuth = 60;
  c.sonar.sonar.rays_elevation = 10;
  c.sonar.sonar.bins_range = 50;
  c.sonar.sonar.bins_azimuth = 20;
  c.sonar.fan_width = 64;
  c.sonar.fan_height = 32;
  c.sonar.mount = Pose{Vec3::Zero(), Quat(Eigen::AngleAxisd(deg2rad(15.0), Vec3::UnitY()))};
  c.dvl.dvl.velocity_noise_std = 0.01;
  c.barometer.barometer.noise_std = 10.0;
  return c;
}

std::map<std::string, std::string> readTree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = testing::readText(e.path());
  }
  return files;
}

std::vector<std::vector<std::string>> readCsv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(testing::readText(path));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("trajectory interpolation") {
  const Quat yaw90(Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ()));
  Trajectory traj;
  traj.samples = {{0.0, Pose{Vec3(0, 0, 0), Quat::Identity()}, Vec3(1, 0, 0)},
                  {2.0, Pose{Vec3(4, 2, -2), yaw90}, Vec3(3, 0, 0)}};
  const auto knot = interpolatePose(traj, 2.0);
  CHECK(knot.pose.position == Vec3(4, 2, -2));
  CHECK(knot.pose.orientation.coeffs() == yaw90.coeffs());
  const auto mid = interpolatePose(traj, 1.0);
  CHECK((mid.pose.position - Vec3(2, 1, -1)).norm() <= 1e-12);
  CHECK((mid.velocity - Vec3(2, 0, 0)).norm() <= 1e-12);
  const Quat yaw45(Eigen::AngleAxisd(kPi / 4, Vec3::UnitZ()));
  CHECK(mid.pose.orientation.angularDistance(yaw45) <= 1e-9);
  CHECK_THROWS_AS(interpolatePose(traj, -0.1), std::out_of_range);
  CHECK_THROWS_AS(interpolatePose(traj, 2.0001), std::out_of_range);
}

TEST_CASE("trajectory CSV parsing") {
  const Trajectory t = Trajectory::fromCsvText(std::string(kHeader) + "# comment\n0,1,2,3,1,0,0,0,0,0,0\n\n1,1,2,3,0,0,0,1,0,0,0\n");
  REQUIRE(t.samples.size() == 2);
  CHECK(t.samples[0].pose.position == Vec3(1, 2, 3));
  CHECK(t.end() == 1.0);
  CHECK_THROWS_AS(Trajectory::fromCsvText("t,x,y\n0,1,2\n"), LoadError);
  CHECK_THROWS_AS(Trajectory::fromCsvText(std::string(kHeader) + "0,1,2,3,1,0,0,0,0,0\n"), LoadError);
  CHECK_THROWS_AS(Trajectory::fromCsvText(std::string(kHeader) + "0,1,2,3,2,0,0,0,0,0,0\n"), LoadError);
  CHECK_THROWS_AS(Trajectory::fromCsvText(std::string(kHeader) + "0,1,2,3,1,0,0,0,0,0,0\n0,1,2,3,1,0,0,0,0,0,0\n"),
                  LoadError);
  CHECK_THROWS_AS(Trajectory::fromCsvText(std::string(kHeader) + "0,1,abc,3,1,0,0,0,0,0,0\n"), LoadError);
  CHECK_THROWS_AS(Trajectory::loadCsv("/nonexistent/traj.csv"), LoadError);
}

TEST_CASE("fixed-rate fire times include both ends") {
  const auto t = fixedRateTimes(0.0, 1.0, 10.0);
  REQUIRE(t.size() == 11);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(t[k] - 0.1 * k) <= 1e-12);
  CHECK(fixedRateTimes(0.0, 0.95, 10.0).size() == 10);
  CHECK(fixedRateTimes(3.0, 3.0, 7.0).size() == 1);
  CHECK_THROWS(fixedRateTimes(0.0, 1.0, 0.0));
}

TEST_CASE("config JSON round trip and relative paths") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  testing::writeText(dir / "traj.csv", straightRun(1.0));
  const json doc = json::parse(R"({
    "scene": "scene.obj", "trajectory": "traj.csv", "output_dir": "ds", "seed": 9,
    "camera": {"rate_hz": 15, "water": "turbid", "depth_convention": "planar_z", "no_hit_range": null,
               "intrinsics": {"width": 64, "height": 48, "hfov_deg": 60}},
    "sonar": {"rate_hz": 2.5, "hfov_deg": 90, "bins_range": 100, "noise": {"enabled": false}},
    "dvl": {"enabled": false},
    "barometer": {"rate_hz": 4, "surface_z": 1.5}
  })");
  const SimConfig c = SimConfig::fromJson(doc, dir.path());
  CHECK(c.scene_path == dir / "scene.obj");
  CHECK(*c.trajectory_path == dir / "traj.csv");
  CHECK(c.output_dir == dir / "ds");
  CHECK(c.camera.rate_hz == 15.0);
  CHECK(c.camera.water == WaterColumnParams::preset("turbid"));
  CHECK(c.camera.depth_convention == DepthConvention::PlanarZ);
  CHECK(c.camera.no_hit_range == 0.0);
  CHECK(c.camera.intrinsics.width == 64);
  CHECK(c.sonar.sonar.hfov_deg == 90.0);
  CHECK(c.sonar.sonar.bins_range == 100);
  CHECK_FALSE(c.sonar.sonar.noise.enabled);
  CHECK_FALSE(c.dvl.enabled);
  CHECK(c.barometer.surface_z == 1.5);

  const SimConfig again = SimConfig::fromJson(c.toJson(), "/elsewhere");
  CHECK(again.toJson() == c.toJson());

  CHECK_THROWS_WITH_AS(SimConfig::fromJson(json::parse(R"({"scene":"missing.obj"})"), dir.path()),
                       doctest::Contains("missing.obj"), LoadError);
  CHECK_THROWS_AS(SimConfig::fromJson(json::parse(R"({"camera":{}})"), dir.path()), ConfigError);
  CHECK_THROWS_AS(SimConfig::fromJson(json::parse(R"({"scene":"scene.obj","camera":{"rate_hz":0}})"), dir.path()),
                  ConfigError);
}

TEST_CASE("one second at 10 Hz yields 11 camera frames at the right times") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  const SimConfig c = smallConfig(dir);
  const RunSummary s = runSimulation(c, Trajectory::fromCsvText(straightRun(1.0)));
  CHECK(s.camera_frames == 11);
  CHECK(s.sonar_frames == 6);
  CHECK(s.barometer_samples == 21);
  const auto rows = readCsv(c.output_dir / "camera/index.csv");
  REQUIRE(rows.size() == 11);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(std::abs(std::stod(rows[k][1]) - 0.1 * k) <= 1e-9);
    CHECK(fs::exists(c.output_dir / rows[k][2]));
    CHECK(fs::exists(c.output_dir / rows[k][3]));
    CHECK(fs::exists(c.output_dir / rows[k][4]));
  }
  const Image depth = readDepthRaw(c.output_dir / "camera/depth/000000.bin");
  CHECK(depth.width() == 32);
  CHECK(depth.height() == 24);
}

TEST_CASE("DVL fires at its adaptive rate and barometer reports depth") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  SimConfig c = smallConfig(dir);
  c.camera.enabled = false;
  c.sonar.enabled = false;
  c.barometer.barometer.noise_std = 0.0;
  runSimulation(c, Trajectory::fromCsvText(straightRun(2.0)));
  const auto dvl = readCsv(c.output_dir / "dvl/dvl.csv");
  REQUIRE(dvl.size() >= 2);
  for (std::size_t k = 1; k < dvl.size(); ++k) {
    const double dt = std::stod(dvl[k][1]) - std::stod(dvl[k - 1][1]);
    CHECK(std::abs(dt - std::stod(dvl[k - 1].back())) <= 1e-9);
  }
  // 8 m altitude: slant range 9.24 m, 8 Hz bracket, 17 pings in [0, 2]
  CHECK(dvl.size() == 17);
  CHECK(dvl[0][2] == "1");
  CHECK(std::abs(std::stod(dvl[0][3]) - 1.0) <= 0.05);

  const auto baro = readCsv(c.output_dir / "baro/baro.csv");
  REQUIRE(baro.size() == 41);
  CHECK(std::stod(baro[0][2]) == doctest::Approx(2.0));
  CHECK(std::stod(baro[0][3]) == doctest::Approx(101325.0 + 1000.0 * 9.80665 * 2.0));
}

TEST_CASE("bottomless water gives invalid DVL rows with empty velocity") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-500));
  SimConfig c = smallConfig(dir);
  c.camera.enabled = false;
  c.sonar.enabled = false;
  const RunSummary s = runSimulation(c, Trajectory::fromCsvText(straightRun(1.0)));
  CHECK(s.dvl_samples > 0);
  CHECK(s.dvl_invalid == s.dvl_samples);
  for (const auto& row : readCsv(c.output_dir / "dvl/dvl.csv")) {
    CHECK(row[2] == "0");
    CHECK(row[3].empty());
    CHECK(row[4].empty());
    CHECK(row[5].empty());
  }
  const json manifest = json::parse(testing::readText(c.output_dir / "manifest.json"));
  for (const auto& f : manifest["frames"]) {
    if (f["sensor"] == "dvl") CHECK(f["velocity"].is_null());
  }
}

TEST_CASE("two runs with the same seed produce byte-identical payloads") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  const Trajectory traj = Trajectory::fromCsvText(straightRun(1.0));
  SimConfig a = smallConfig(dir, "a");
  SimConfig b = smallConfig(dir, "b");
  b.workers = 3;
  runSimulation(a, traj);
  runSimulation(b, traj);
  auto ta = readTree(a.output_dir);
  auto tb = readTree(b.output_dir);
  json ma = json::parse(ta.at("manifest.json"));
  json mb = json::parse(tb.at("manifest.json"));
  ta.erase("manifest.json");
  tb.erase("manifest.json");
  CHECK(ta.size() > 30);
  CHECK(ta == tb);
  ma.erase("wall_clock_unix");
  mb.erase("wall_clock_unix");
  ma["config"].erase("workers");
  mb["config"].erase("workers");
  CHECK(ma == mb);

  SimConfig other = smallConfig(dir, "c");
  other.seed = 22;
  runSimulation(other, traj);
  const auto tc = readTree(other.output_dir);
  CHECK(tc.at("sonar/polar/000001.csv") != ta.at("sonar/polar/000001.csv"));
  CHECK(tc.at("camera/rgb/000001.png") == ta.at("camera/rgb/000001.png"));
}

TEST_CASE("manifest references every file and nothing else") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  const SimConfig c = smallConfig(dir);
  const RunSummary s = runSimulation(c, Trajectory::fromCsvText(straightRun(1.0)));
  const json manifest = json::parse(testing::readText(c.output_dir / "manifest.json"));
  CHECK(manifest["format"] == "marisim-dataset-1");
  CHECK(manifest["seed"] == 21);
  CHECK(manifest["sensor_seeds"].size() == 3);
  CHECK_FALSE(manifest["config"].contains("output_dir"));

  std::set<std::string> on_disk;
  for (const auto& [rel, body] : readTree(c.output_dir)) {
    if (rel != "manifest.json") on_disk.insert(rel);
  }
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
  CHECK(listed == on_disk);
  CHECK(s.files.size() == on_disk.size() + 1);

  std::set<std::string> referenced;
  std::map<std::string, int> per_sensor;
  for (const auto& f : manifest["frames"]) {
    ++per_sensor[f["sensor"].get<std::string>()];
    CHECK(f.contains("t"));
    if (f.contains("files")) {
      for (const auto& p : f["files"]) referenced.insert(p.get<std::string>());
    } else {
      referenced.insert(f["file"].get<std::string>());
    }
  }
  for (const auto& r : referenced) CHECK(on_disk.count(r) == 1);
  for (const auto& d : on_disk) {
    const bool index = d.find("index.csv") != std::string::npos;
    CHECK((index || referenced.count(d) == 1));
  }
  CHECK(per_sensor["camera"] == 11);
  CHECK(per_sensor["sonar"] == 6);
  CHECK(per_sensor["barometer"] == 21);
  CHECK(per_sensor["dvl"] == static_cast<int>(s.dvl_samples));
}

TEST_CASE("output directory policy") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  SimConfig c = smallConfig(dir);
  c.camera.enabled = false;
  c.sonar.enabled = false;
  const Trajectory traj = Trajectory::fromCsvText(straightRun(0.5));
  runSimulation(c, traj);
  CHECK_THROWS_WITH(runSimulation(c, traj), doctest::Contains("not empty"));
  RunOptions overwrite;
  overwrite.overwrite = true;
  CHECK_NOTHROW(runSimulation(c, traj, overwrite));
  testing::writeText(c.output_dir / "notes.txt", "mine");
  CHECK_THROWS_WITH(runSimulation(c, traj, overwrite), doctest::Contains("foreign"));
  CHECK(testing::readText(c.output_dir / "notes.txt") == "mine");
}

TEST_CASE("missing asset aborts before any output") {
  testing::TempDir dir;
  SimConfig c = smallConfig(dir);
  CHECK_THROWS_AS(runSimulation(c, Trajectory::fromCsvText(straightRun(1.0))), LoadError);
  CHECK_FALSE(fs::exists(c.output_dir));
  testing::writeText(dir / "scene.obj", floorObj(-10));
  c.material_table_path = dir / "nope.json";
  CHECK_THROWS_AS(runSimulation(c, Trajectory::fromCsvText(straightRun(1.0))), LoadError);
  CHECK_FALSE(fs::exists(c.output_dir));
  testing::writeText(dir / "broken.obj", "v 0 0 0\nf 1 2 3\n");
  c.material_table_path.reset();
  c.scene_path = dir / "broken.obj";
  CHECK_THROWS_AS(runSimulation(c, Trajectory::fromCsvText(straightRun(1.0))), LoadError);
  CHECK_FALSE(fs::exists(c.output_dir));
}

TEST_CASE("single-frame render") {
  testing::TempDir dir;
  testing::writeText(dir / "scene.obj", floorObj(-10));
  const SimConfig c = smallConfig(dir);
  const RunSummary s = renderSingleFrame(c, Pose{Vec3(0, 0, -2), Quat::Identity()});
  CHECK(s.camera_frames == 1);
  CHECK(s.sonar_frames == 1);
  CHECK(s.dvl_samples == 1);
  CHECK(s.barometer_samples == 1);
  const Image fan = decodePng(std::vector<std::uint8_t>(
      [&] {
        const std::string b = testing::readText(c.output_dir / "sonar/fan/000000.png");
        return std::vector<std::uint8_t>(b.begin(), b.end());
      }()));
  CHECK(fan.width() == 64);
  CHECK(fan.height() == 32);
}
