#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slab/stochastic.hpp"

namespace slab {

/// System and model constants of the cluster.
struct WorkloadParams {
  double lambda = 1.0;   ///< job arrival rate
  int num_nodes = 20;    ///< N
  double capacity = 10;  ///< C, resource units per node
  int k_max = 10;
  double b_min = 10.0;
  double beta = 3.0;     ///< service-time tail index
  double alpha = 3.0;    ///< slowdown tail index
  /// Upper truncation point of B; 0 means plain Pareto.
  double b_max = 0.0;

  void validate() const;

  ServiceDist service_dist() const;
  ParetoDist slowdown_dist() const { return ParetoDist(1.0, alpha); }
  ZipfDist task_count_dist() const { return ZipfDist(k_max); }
  double total_capacity() const { return num_nodes * capacity; }
};

/// Reference cluster: 20 nodes of capacity 10, Zipf(10) tasks, Pareto(10, 3) service, Pareto(1, 3) slowdown.
WorkloadParams reference_params();

struct JobSpec {
  std::int64_t job_id = 0;
  double arrival_time = 0.0;
  int k = 1;
  double b = 0.0;
  double r_cap = 1.0;
};

std::vector<JobSpec> generate_workload(const WorkloadParams& params, std::int64_t num_jobs,
                                       RngStream& rng);

inline double job_demand(const JobSpec& job) { return job.k * job.r_cap * job.b; }

/// Arrival rate at which the no-redundancy node load equals rho0.
double lambda_for_offered_load(double rho0, const WorkloadParams& params);

/// Inverse of lambda_for_offered_load.
double offered_load(const WorkloadParams& params);

/// Mean job cost without any mitigation: E[K] E[B] E[S].
double baseline_cost_mean(const WorkloadParams& params);

void write_workload_csv(std::ostream& out, const std::vector<JobSpec>& jobs);
std::vector<JobSpec> read_workload_csv(std::istream& in);

}  // namespace slab
