#include "shapeopt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "shapeopt/mesh_io.hpp"
#include "shapeopt/target.hpp"

namespace shapeopt {

namespace {

std::string num(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::filesystem::path snapshot_path(const std::filesystem::path& dir, int iter) {
  char name[32];
  std::snprintf(name, sizeof name, "it%04d.vtk", iter);
  return dir / name;
}

void write_snapshot(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> temperature,
                    const DeformField& gradient) {
  const ScalarField scalars[] = {{"temperature", temperature}};
  std::vector<VectorField> vectors;
  if (gradient.values.size() == 2 * mesh.num_vertices()) vectors.push_back({"gradient", gradient.values});
  save_vtk(mesh, path, scalars, vectors);
}

constexpr std::string_view kPlotScript = R"(#!/usr/bin/env python3
"""Plots convergence.csv (or comparison.csv) from a run directory."""
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

run_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
conv = run_dir / "convergence.csv"
if conv.exists():
    with conv.open() as f:
        rows = list(csv.DictReader(f))
    it = [int(r["iter"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].semilogy(it, [float(r["distance"]) for r in rows], "o-")
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("distance to target")
    axes[1].semilogy(it, [float(r["J"]) for r in rows], "o-")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("J")
    fig.tight_layout()
    fig.savefig(run_dir / "convergence.png", dpi=120)
comp = run_dir / "comparison.csv"
if comp.exists():
    with comp.open() as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    fig, ax = plt.subplots(figsize=(6, 4))
    for c, name in enumerate(header[1:], start=1):
        pts = [(int(r[0]), float(r[c])) for r in rows if r[c]]
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("distance to target")
    ax.legend()
    fig.tight_layout()
    fig.savefig(run_dir / "comparison.png", dpi=120)
)";

}  // namespace

void write_convergence_csv(std::ostream& out, const std::vector<IterateRecord>& history) {
  out << kConvergenceHeader << '\n';
  for (const auto& r : history)
    out << r.iter << ',' << num(r.J) << ',' << num(r.j_track) << ',' << num(r.perimeter) << ',' << num(r.distance)
        << ',' << num(r.step) << ',' << num(r.gradnorm) << ',' << num(r.minquality) << '\n';
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  open_out(dir / "config.ini") << serialize(config);
  open_out(dir / "plot_convergence.py") << kPlotScript;

  const auto start = std::chrono::steady_clock::now();
  const TargetData target = generate_target_data(config);
  const TriMesh mesh = initial_mesh(config);

  std::set<int> written;
  std::ofstream csv = open_out(dir / "convergence.csv");
  csv << kConvergenceHeader << '\n';
  OptimizationCallbacks callbacks;
  callbacks.on_iterate = [&](const IterateRecord& r, const TriMesh& m, std::span<const double> temperature,
                             const DeformField& gradient) {
    csv << r.iter << ',' << num(r.J) << ',' << num(r.j_track) << ',' << num(r.perimeter) << ',' << num(r.distance)
        << ',' << num(r.step) << ',' << num(r.gradnorm) << ',' << num(r.minquality) << '\n';
    csv.flush();
    if (std::find(std::begin(kSnapshotIterations), std::end(kSnapshotIterations), r.iter) !=
        std::end(kSnapshotIterations)) {
      write_snapshot(snapshot_path(dir, r.iter), m, temperature, gradient);
      written.insert(r.iter);
    }
  };

  ExperimentOutcome outcome;
  outcome.output_dir = dir;
  outcome.result = run_optimization(config, target, mesh, callbacks);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& result = outcome.result;

  const int last = result.history.empty() ? 0 : result.history.back().iter;
  if (result.final_mesh && !written.contains(last))
    write_snapshot(snapshot_path(dir, last), *result.final_mesh, result.final_temperature, result.final_gradient);

  nlohmann::ordered_json summary;
  summary["method"] = std::string(to_string(config.method));
  summary["status"] = std::string(to_string(result.status));
  summary["diverged"] = result.diverged;
  summary["message"] = result.message;
  summary["iterations"] = last;
  if (!result.history.empty()) {
    summary["initial_J"] = result.history.front().J;
    summary["final_J"] = result.history.back().J;
    summary["initial_distance"] = result.history.front().distance;
    summary["final_distance"] = result.history.back().distance;
    summary["final_min_quality"] = result.history.back().minquality;
  }
  double identity = 0.0;
  for (const auto& d : result.diagnostics) identity = std::max(identity, d.metric_identity);
  summary["max_metric_identity_residual"] = identity;
  summary["sobolev_a"] = config.sobolev_a;
  summary["cells"] = mesh.num_triangles();
  summary["wall_time_seconds"] = outcome.wall_seconds;
  open_out(dir / "summary.json") << summary.dump(2) << '\n';
  return outcome;
}

int exit_code(const ExperimentOutcome& outcome) { return outcome.result.diverged ? 1 : 0; }

void write_target(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  const TargetData target = generate_target_data(config);
  save_trimesh(target.mesh, dir / "target.trimesh");
  const ScalarField scalars[] = {{"ybar_final", target.ybar.steps.back()}};
  save_vtk(target.mesh, dir / "target.vtk", scalars);
  std::ofstream out = open_out(dir / "target_ybar.csv");
  out << "step,time";
  for (std::size_t v = 0; v < target.mesh.num_vertices(); ++v) out << ",v" << v;
  out << '\n';
  for (std::size_t n = 0; n < target.ybar.steps.size(); ++n) {
    out << n << ',' << num(static_cast<double>(n) * target.ybar.dt);
    for (double v : target.ybar.steps[n]) out << ',' << num(v);
    out << '\n';
  }
}

std::vector<MethodColumn> compare_methods(const ExperimentConfig& config, const std::vector<Method>& methods) {
  if (methods.size() < 2) throw Error("comparison needs at least two methods");
  config.validate();
  const TargetData target = generate_target_data(config);
  const TriMesh mesh = initial_mesh(config);
  std::vector<MethodColumn> columns;
  for (Method m : methods) {
    ExperimentConfig c = config;
    c.method = m;
    const OptimizationResult r = run_optimization(c, target, mesh);
    MethodColumn col;
    col.name = std::string(to_string(m));
    for (const auto& rec : r.history) {
      col.distance.push_back(rec.distance);
      col.objective.push_back(rec.J);
    }
    col.diverged = r.diverged;
    columns.push_back(std::move(col));
  }
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::ofstream out = open_out(dir / "comparison.csv");
  write_comparison_csv(out, columns);
  open_out(dir / "plot_convergence.py") << kPlotScript;
  return columns;
}

void write_comparison_csv(std::ostream& out, const std::vector<MethodColumn>& columns) {
  out << "iter";
  std::size_t rows = 0;
  for (const auto& c : columns) {
    out << ',' << c.name;
    rows = std::max(rows, c.distance.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    out << i;
    for (const auto& c : columns) {
      out << ',';
      if (i < c.distance.size()) out << num(c.distance[i]);
    }
    out << '\n';
  }
}

int iterations_to_threshold(const std::vector<double>& distance, double fraction) {
  if (distance.empty()) return -1;
  for (std::size_t i = 0; i < distance.size(); ++i)
    if (distance[i] <= fraction * distance.front()) return static_cast<int>(i);
  return -1;
}

}  // namespace shapeopt
