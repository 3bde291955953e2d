#pragma once

// Experiment driver: runs, output files and method comparison.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "shapeopt/config.hpp"
#include "shapeopt/optimizer.hpp"

namespace shapeopt {

inline constexpr std::string_view kConvergenceHeader = "iter,J,j_track,perimeter,distance,step,gradnorm,minquality";

/// Iterations whose mesh is written as it####.vtk (plus the final one).
inline constexpr int kSnapshotIterations[] = {0, 2, 4, 20};

void write_convergence_csv(std::ostream& out, const std::vector<IterateRecord>& history);

struct ExperimentOutcome {
  OptimizationResult result;
  double wall_seconds = 0.0;
  std::filesystem::path output_dir;
};

/// Runs one method and writes convergence.csv, it####.vtk snapshots,
/// summary.json, config.ini and plot_convergence.py into config.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);
/// 0 on success, 1 when the run is flagged diverged.
int exit_code(const ExperimentOutcome& outcome);

/// Target mesh and observation written to config.output_dir.
void write_target(const ExperimentConfig& config);

struct MethodColumn {
  std::string name;
  std::vector<double> distance;  // per iteration, until the run stopped
  std::vector<double> objective;
  bool diverged = false;
};

/// Runs every method on the same initial mesh and target data and writes
/// comparison.csv (iter, then one distance column per method).
std::vector<MethodColumn> compare_methods(const ExperimentConfig& config, const std::vector<Method>& methods);
void write_comparison_csv(std::ostream& out, const std::vector<MethodColumn>& columns);

/// First iteration whose distance is <= fraction * initial distance, or -1.
int iterations_to_threshold(const std::vector<double>& distance, double fraction);

}  // namespace shapeopt
