#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapeopt/config.hpp"
#include "shapeopt/experiment.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/mesh_io.hpp"
#include "shapeopt/target.hpp"

namespace {

using namespace shapeopt;

ExperimentConfig build_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const auto& s : overrides) config.set(s);
  config.validate();
  return config;
}

void print_mesh_stats(const TriMesh& mesh) {
  std::printf("vertices        %zu\n", mesh.num_vertices());
  std::printf("triangles       %zu\n", mesh.num_triangles());
  std::printf("interface verts %zu\n", mesh.interface_loop().size());
  std::printf("perimeter       %.12g\n", interface_perimeter(mesh));
  std::printf("min quality     %.6g\n", min_quality(mesh));
}

int run_mesh(const ExperimentConfig& config, const std::string& input, const std::string& shape, int cells) {
  if (!input.empty()) {
    const TriMesh mesh = load_trimesh(input);
    validate(mesh);
    print_mesh_stats(mesh);
    return 0;
  }
  const ShapeSpec spec = shape.empty() ? config.initial_shape : ShapeSpec::parse(shape);
  const int n = cells > 0 ? cells : config.cells;
  const TriMesh mesh = generate_interface_mesh(spec.profile(), edge_length_for_cells(static_cast<std::size_t>(n)));
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  save_trimesh(mesh, dir / "mesh.trimesh");
  save_vtk(mesh, dir / "mesh.vtk");
  std::printf("shape           %s\n", spec.to_string().c_str());
  print_mesh_stats(mesh);
  std::printf("distance        %.12g (to %s)\n", distance_to_target(mesh, config.target_shape.profile()),
              config.target_shape.to_string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface identification from heat-equation data by shape optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--print-config", print_config, "print the effective configuration and exit");
    sub->add_option("-c,--config", config_path, "configuration file (key = value, [sections])")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override, e.g. --set optimizer.memory=5")->take_all();
  };

  auto* target = app.add_subcommand("target", "generate the target mesh and observation data");
  add_common(target);

  auto* run = app.add_subcommand("run", "run a single method");
  add_common(run);

  std::vector<std::string> methods{"lbfgs", "gradient"};
  auto* compare = app.add_subcommand("compare", "run several methods on the same initial mesh");
  add_common(compare);
  compare->add_option("-m,--methods", methods, "methods to compare")->take_all();

  std::string input;
  std::string shape;
  int cells = 0;
  auto* mesh = app.add_subcommand("mesh", "generate or inspect a mesh");
  add_common(mesh);
  mesh->add_option("-i,--input", input, "inspect an existing .trimesh file")->check(CLI::ExistingFile);
  mesh->add_option("--shape", shape, "interface shape, e.g. \"star 0.35 0.1 3\"");
  mesh->add_option("--cells", cells, "approximate number of triangles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig config = build_config(config_path, overrides);
    if (print_config) {
      std::cout << serialize(config);
      return 0;
    }
    if (*target) {
      write_target(config);
      std::printf("target written to %s\n", config.output_dir.c_str());
      return 0;
    }
    if (*run) {
      const ExperimentOutcome outcome = run_experiment(config);
      const auto& h = outcome.result.history;
      if (!h.empty())
        std::printf("%s: %zu iterations, J %.6g -> %.6g, distance %.6g -> %.6g, %.1f s\n",
                    std::string(to_string(outcome.result.status)).c_str(), h.size() - 1, h.front().J, h.back().J,
                    h.front().distance, h.back().distance, outcome.wall_seconds);
      if (outcome.result.diverged) std::printf("diverged: %s\n", outcome.result.message.c_str());
      return exit_code(outcome);
    }
    if (*compare) {
      std::vector<Method> list;
      for (const auto& m : methods) list.push_back(parse_method(m));
      const auto columns = compare_methods(config, list);
      bool diverged = false;
      for (const auto& c : columns) {
        std::printf("%-18s iterations %-4zu final distance %-12.6g to 10%%: %d%s\n", c.name.c_str(),
                    c.distance.empty() ? 0 : c.distance.size() - 1, c.distance.empty() ? 0.0 : c.distance.back(),
                    iterations_to_threshold(c.distance, 0.1), c.diverged ? "  (diverged)" : "");
        diverged = diverged || c.diverged;
      }
      return diverged ? 1 : 0;
    }
    if (*mesh) return run_mesh(config, input, shape, cells);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
