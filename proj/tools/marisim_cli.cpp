// marisim: render, record, bench, colorcheck and serve.

#include "marisim/config_json.hpp"
#include "marisim/metrics.hpp"
#include "marisim/sdg.hpp"
#include "marisim/tuning_server.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace marisim;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
};

void addCommon(CLI::App* app, CommonFlags& f, bool config_required) {
  auto* opt = app->add_option("--config", f.config, "simulation config JSON");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "global seed (overrides the config)");
  app->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  app->add_option("--out", f.out, "output directory or file");
}

SimConfig loadConfig(const CommonFlags& f) {
  SimConfig c = SimConfig::load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (!f.out.empty()) c.output_dir = f.out;
  return c;
}

void printSummary(const RunSummary& s, const SimConfig& c) {
  std::cout << "wrote " << s.files.size() << " files to " << c.output_dir.string() << "\n"
            << "  camera frames: " << s.camera_frames << "\n"
            << "  sonar frames:  " << s.sonar_frames << "\n"
            << "  dvl samples:   " << s.dvl_samples << " (" << s.dvl_invalid << " invalid)\n"
            << "  baro samples:  " << s.barometer_samples << "\n";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

volatile std::sig_atomic_t g_stop = 0;

void onSignal(int) { g_stop = 1; }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater camera, sonar and navigation sensor simulator"};
  app.require_subcommand(1);

  CommonFlags render_flags;
  bool render_overwrite = false;
  auto* render = app.add_subcommand("render", "render one frame of every enabled sensor at the config pose");
  addCommon(render, render_flags, true);
  render->add_flag("--overwrite", render_overwrite, "replace a previous dataset in --out");

  CommonFlags record_flags;
  std::string trajectory;
  bool record_overwrite = false;
  auto* record = app.add_subcommand("record", "play a trajectory and record a dataset");
  addCommon(record, record_flags, true);
  record->add_option("--trajectory", trajectory, "trajectory CSV (overrides the config)")->check(CLI::ExistingFile);
  record->add_flag("--overwrite", record_overwrite, "replace a previous dataset in --out");

  CommonFlags bench_flags;
  int bench_frames = 100;
  int synthetic = 0;
  std::string bench_scene;
  auto* bench = app.add_subcommand("bench", "time sonar rendering at a fixed pose");
  addCommon(bench, bench_flags, false);
  bench->add_option("--frames", bench_frames, "timed frames")->check(CLI::PositiveNumber);
  bench->add_option("--scene", bench_scene, "scene file (instead of --config)");
  bench->add_option("--synthetic", synthetic, "use a generated seafloor with at least N triangles");

  std::string cc_reference, cc_rendered, cc_patches, cc_out;
  auto* colorcheck = app.add_subcommand("colorcheck", "color-chart angular error between two images");
  colorcheck->add_option("--reference", cc_reference, "reference PNG")->required()->check(CLI::ExistingFile);
  colorcheck->add_option("--rendered", cc_rendered, "rendered PNG")->required()->check(CLI::ExistingFile);
  colorcheck->add_option("--patches", cc_patches, "patch spec JSON")->required()->check(CLI::ExistingFile);
  colorcheck->add_option("--out", cc_out, "write the JSON report here");

  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "run the water-parameter tuning service");
  serve->add_option("--address", address, "bind address");
  serve->add_option("--port", port, "TCP port, 0 picks one");
  serve->add_option("--static", static_dir, "directory with the UI assets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) {
      const SimConfig c = loadConfig(render_flags);
      printSummary(renderSingleFrame(c, c.pose, {render_overwrite}), c);
    } else if (*record) {
      SimConfig c = loadConfig(record_flags);
      if (!trajectory.empty()) c.trajectory_path = std::filesystem::absolute(trajectory);
      if (!c.trajectory_path) throw ConfigError("record needs a trajectory (config \"trajectory\" or --trajectory)");
      const Trajectory traj = Trajectory::loadCsv(*c.trajectory_path);
      printSummary(runSimulation(c, traj, {record_overwrite}), c);
    } else if (*bench) {
      SonarConfig sonar;
      Pose pose = syntheticSeafloorPose();
      std::optional<Scene> scene;
      std::string name;
      if (!bench_flags.config.empty()) {
        const SimConfig c = loadConfig(bench_flags);
        sonar = c.sonar.sonar;
        pose = c.pose;
        std::optional<MaterialTable> table;
        if (c.material_table_path) table = MaterialTable::load(*c.material_table_path);
        scene = loadScene(c.scene_path, table ? *table : MaterialTable{});
        name = c.scene_path.filename().string();
      } else if (!bench_scene.empty()) {
        scene = loadScene(bench_scene);
        name = std::filesystem::path(bench_scene).filename().string();
        pose = Pose{};
      } else {
        scene.emplace(syntheticSeafloor(synthetic > 0 ? synthetic : 100000));
        name = "seafloor-" + std::to_string(scene->triangleCount());
      }
      if (bench_flags.seed) sonar.seed = *bench_flags.seed;
      if (bench_flags.workers) sonar.workers = *bench_flags.workers;
      const BenchReport report = benchSonar(*scene, pose, sonar, bench_frames, name);
      std::cout << benchReportTable(report);
      if (!bench_flags.out.empty()) {
        std::ofstream out(bench_flags.out);
        out << benchReportToJsonText(report) << "\n";
        if (!out) throw std::runtime_error("cannot write " + bench_flags.out);
      }
    } else if (*colorcheck) {
      const PatchReport report =
          patchErrorReport(readPng(cc_reference), readPng(cc_rendered), patchSpecsFromJsonText(slurp(cc_patches)));
      for (const auto& p : report.patches) std::printf("%-16s %8.3f deg\n", p.name.c_str(), p.error_deg);
      std::printf("%-16s %8.3f deg\n", "mean", report.mean_error_deg);
      if (!cc_out.empty()) {
        std::ofstream out(cc_out);
        out << patchReportToJsonText(report) << "\n";
        if (!out) throw std::runtime_error("cannot write " + cc_out);
      }
    } else if (*serve) {
      TuningService service;
      TuningServer server(service, {address, port, static_dir});
      const unsigned short bound = server.start();
      std::cout << "tuning service listening on http://" << address << ":" << bound << "/" << std::endl;
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
