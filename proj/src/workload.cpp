#include "slab/workload.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "slab/errors.hpp"

namespace slab {

void WorkloadParams::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("workload.lambda", "must be > 0");
  if (num_nodes < 1) throw ConfigError("workload.num_nodes", "must be >= 1");
  if (!(capacity > 0.0)) throw ConfigError("workload.capacity", "must be > 0");
  if (k_max < 1) throw ConfigError("workload.k_max", "must be >= 1");
  if (!(b_min > 0.0)) throw ConfigError("workload.b_min", "must be > 0");
  if (!(alpha > 1.0)) throw ConfigError("workload.alpha", "must be > 1");
  if (b_max == 0.0) {
    if (!(beta > 1.0)) throw ConfigError("workload.beta", "must be > 1 (finite mean)");
  } else {
    if (!(beta > 0.0)) throw ConfigError("workload.beta", "must be > 0");
    if (!(b_max > b_min)) throw ConfigError("workload.b_max", "must exceed b_min");
  }
}

ServiceDist WorkloadParams::service_dist() const {
  if (b_max > 0.0) return TruncatedParetoDist(b_min, b_max, beta);
  return ParetoDist(b_min, beta);
}

WorkloadParams reference_params() { return WorkloadParams{}; }

std::vector<JobSpec> generate_workload(const WorkloadParams& params, std::int64_t num_jobs,
                                       RngStream& rng) {
  params.validate();
  const ZipfDist task_counts = params.task_count_dist();
  const ServiceDist service = params.service_dist();
  std::vector<JobSpec> jobs;
  jobs.reserve(static_cast<std::size_t>(std::max<std::int64_t>(num_jobs, 0)));
  double t = 0.0;
  for (std::int64_t id = 0; id < num_jobs; ++id) {
    JobSpec job;
    job.job_id = id;
    t += rng.exponential(params.lambda);
    job.arrival_time = t;
    job.k = sample(task_counts, rng);
    job.b = sample(service, rng);
    jobs.push_back(job);
  }
  return jobs;
}

double baseline_cost_mean(const WorkloadParams& params) {
  return zipf_mean(params.task_count_dist()) * service_moment(params.service_dist(), 1.0) *
         pareto_moment(params.slowdown_dist(), 1.0);
}

double lambda_for_offered_load(double rho0, const WorkloadParams& params) {
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw DomainError("lambda_for_offered_load: rho0 must lie in (0, 1)");
  return rho0 * params.total_capacity() / baseline_cost_mean(params);
}

double offered_load(const WorkloadParams& params) {
  return params.lambda * baseline_cost_mean(params) / params.total_capacity();
}

void write_workload_csv(std::ostream& out, const std::vector<JobSpec>& jobs) {
  out << "job_id,arrival_time,k,b\n";
  char buf[128];
  for (const auto& j : jobs) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%d,%.17g\n", static_cast<long long>(j.job_id),
                  j.arrival_time, j.k, j.b);
    out << buf;
  }
}

std::vector<JobSpec> read_workload_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "job_id,arrival_time,k,b") {
    throw ConfigError("workload", "expected header job_id,arrival_time,k,b");
  }
  std::vector<JobSpec> jobs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    JobSpec j;
    long long id = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%d,%lf", &id, &j.arrival_time, &j.k, &j.b) != 4) {
      throw ConfigError("workload:" + std::to_string(line_no), "malformed row");
    }
    j.job_id = id;
    if (!jobs.empty() && !(j.arrival_time > jobs.back().arrival_time)) {
      throw ConfigError("workload:" + std::to_string(line_no),
                        "arrival times must be strictly increasing");
    }
    jobs.push_back(j);
  }
  return jobs;
}

}  // namespace slab
