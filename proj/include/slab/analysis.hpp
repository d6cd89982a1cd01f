#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slab/policies.hpp"
#include "slab/workload.hpp"

namespace slab {

struct RedSmallModel {
  WorkloadParams params;
  double r = 2.0;
  double d = 0.0;
};

struct RelaunchModel {
  WorkloadParams params;
  RelaunchMode mode = FixedW{};
};

struct JobMoments {
  double latency_m1 = 0.0;
  double latency_m2 = 0.0;
  double cost_m1 = 0.0;
};

/// E[Latency^m] of an arbitrary job under Redundant-small(r, d), m in {1, 2}.
double redsmall_latency_moment(const RedSmallModel& model, int m);
double redsmall_cost_mean(const RedSmallModel& model);
JobMoments redsmall_moments(const RedSmallModel& model);

/// Mean node load lambda * E[Cost] / (N C).
double system_load(double lambda, int num_nodes, double capacity, double cost_mean);

/// Erlang C for real-valued c via the upper incomplete gamma function, or the
/// large-scale limit rho when `asymptotic` is set.
double queueing_probability(double c, double rho, bool asymptotic);

struct MgcEstimate {
  double c = 0.0;
  double rho = 0.0;
  double pr_queueing = 0.0;
  double expected_T = 0.0;
  double latency_m1 = 0.0;
  double latency_m2 = 0.0;
  double cost_m1 = 0.0;
  bool asymptotic = false;
};

/// Two-moment M/G/c estimate of the mean response time. Throws
/// InstabilityError when the implied load is >= 1.
MgcEstimate mgc_response_time(double latency_m1, double latency_m2, double cost_m1, double lambda,
                              int num_nodes, double capacity, bool asymptotic);

/// Moments of one (k, b) job whose unfinished tasks are restarted once at w b.
double relaunch_latency_mean(int k, double b, double w, double alpha);
double relaunch_latency_second(int k, double b, double w, double alpha);
/// Mean total busy time, counting the discarded first attempts.
double relaunch_cost_mean(int k, double b, double w, double alpha);

JobMoments relaunch_moments_marginal(const RelaunchModel& model);

struct CurvePoint {
  double param_value = 0.0;
  JobMoments moments;
  double c = 0.0;
  double rho = 0.0;
  std::optional<MgcEstimate> estimate;  ///< empty when unstable

  bool unstable() const { return !estimate.has_value(); }
};

struct OptimizationResult {
  std::string param_name;
  double rho0 = 0.0;
  double lambda = 0.0;
  bool asymptotic = false;
  std::optional<double> best_param;
  std::optional<MgcEstimate> best;
  std::vector<CurvePoint> curve;
};

std::vector<double> default_d_grid();
std::vector<double> default_w_grid();

OptimizationResult optimize_demand_threshold(const WorkloadParams& params, double r, double rho0,
                                             std::span<const double> d_grid,
                                             bool asymptotic = false);

OptimizationResult optimize_relaunch_factor(const WorkloadParams& params, double rho0,
                                            std::span<const double> w_grid,
                                            bool asymptotic = false);

/// Single-mode evaluation, e.g. for the per-job relaunch rules.
CurvePoint evaluate_relaunch(const WorkloadParams& params, double rho0, const RelaunchMode& mode,
                             bool asymptotic = false);

}  // namespace slab
