#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slab/analysis.hpp"
#include "slab/policies.hpp"
#include "slab/rl.hpp"
#include "slab/simulator.hpp"
#include "slab/table.hpp"
#include "slab/workload.hpp"

namespace slab {

struct AnalysisConfig {
  std::string model = "redsmall";  ///< "redsmall" or "relaunch"
  double r = 2.0;
  std::vector<double> d_grid = default_d_grid();
  std::vector<double> w_grid = default_w_grid();
  std::vector<double> rho0_grid;  ///< empty: use the workload's rho0
};

struct ExperimentConfig {
  WorkloadParams workload;
  std::optional<double> rho0;  ///< when set, lambda is derived from it
  PolicyConfig policy = RedundantNone{};
  std::string checkpoint;  ///< network file for the rl policy
  SimConfig sim;
  double extra_jobs_fraction = 0.1;  ///< arrivals beyond num_jobs keep the load steady
  bool write_jobs = false;
  int runs = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;  ///< 0: hardware concurrency
  AnalysisConfig analysis;
  TrainerConfig rl;
  std::vector<double> compare_rho0 = {0.4, 0.6, 0.9};
  std::string out_dir = "out";
  std::string format = "csv";

  void validate() const;
  double effective_rho0() const;
  WorkloadParams resolved_workload() const;  ///< with lambda filled in
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// num_jobs counted jobs plus a tail of extra arrivals, from stream `seed`.
std::vector<JobSpec> make_workload(const WorkloadParams& params, std::int64_t num_jobs,
                                   double extra_fraction, std::uint64_t seed);

struct RunSpec {
  WorkloadParams params;  ///< lambda already resolved
  PolicyConfig policy = RedundantNone{};
  SimConfig sim;
  double extra_jobs_fraction = 0.1;
};

SimMetrics simulate_once(const RunSpec& spec, std::uint64_t seed);

/// Runs with seeds base_seed, base_seed+1, ...; results ordered by seed.
std::vector<SimMetrics> simulate_runs(const RunSpec& spec, int runs, std::uint64_t base_seed,
                                      unsigned threads = 0);

/// Half-width of the two-sided 95% t interval of the mean; NaN for one value.
double ci95_halfwidth(const std::vector<double>& xs);

struct Aggregate {
  double mean_T = 0.0, ci95_T = 0.0;
  double mean_slowdown = 0.0, ci95_slowdown = 0.0;
  double p99_slowdown = 0.0;
  double utilization = 0.0;
  bool unstable = false;
  std::vector<TailPoint> tail;
};

Aggregate aggregate(const std::vector<SimMetrics>& runs);

Table summary_table();
void add_summary_row(Table& t, const std::string& policy, double rho0, double param,
                     const Aggregate& a);
Table curve_table();
void add_curve_rows(Table& t, const OptimizationResult& res);

/// Named output tables produced by a command.
using Outputs = std::vector<std::pair<std::string, Table>>;

Outputs cmd_analyze(const ExperimentConfig& cfg);
Outputs cmd_optimize(const ExperimentConfig& cfg);
Outputs cmd_simulate(const ExperimentConfig& cfg);
Outputs cmd_train(const ExperimentConfig& cfg, QNetwork* trained = nullptr);
Outputs cmd_compare(const ExperimentConfig& cfg);

/// Writes each table as <out_dir>/<name>.<format>.
void write_outputs(const Outputs& outputs, const std::filesystem::path& dir,
                   const std::string& format);

}  // namespace slab
