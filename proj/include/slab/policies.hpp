#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "slab/cluster.hpp"
#include "slab/qnetwork.hpp"
#include "slab/workload.hpp"

namespace slab {

struct RedundantNone {};

struct RedundantAll {
  int max_extra = 3;
};

struct RedundantSmall {
  double r = 2.0;  ///< expansion rate
  double d = 0.0;  ///< demand threshold
};

enum class WRule {
  closed_form,     ///< square-root rule
  latency_argmin,  ///< numerical minimizer of the per-job mean latency
};

struct FixedW {
  double w = 2.0;
};

struct PerJobOptimalW {
  WRule rule = WRule::closed_form;
};

using RelaunchMode = std::variant<FixedW, PerJobOptimalW>;

struct StragglerRelaunch {
  RelaunchMode mode = FixedW{};
};

struct RLPolicy {
  std::shared_ptr<const QNetwork> net;
};

using PolicyConfig =
    std::variant<RedundantNone, RedundantAll, RedundantSmall, StragglerRelaunch, RLPolicy>;

void validate_policy(const PolicyConfig& policy);

/// Short identifier used in output tables.
std::string policy_name(const PolicyConfig& policy);

/// The policy's tuning knob (max_extra, d, w); NaN when there is none.
double policy_param(const PolicyConfig& policy);

struct RedundancyDecision {
  int n = 1;
  std::optional<double> relaunch_time;  ///< offset from dispatch
};

RedundancyDecision decide_redundancy(const PolicyConfig& policy, const JobSpec& job,
                                     const ClusterView& view);

/// ceil(r k) with a small guard against representation error.
int expanded_task_count(double r, int k);

/// max(1, sqrt(Gamma(k+1) Gamma(1-1/alpha) / Gamma(k+1-1/alpha))).
double per_job_optimal_w(int k, double alpha);

/// Minimizer over w in [1, w_max] of the mean relaunch latency of a k-task job.
double latency_argmin_w(int k, double alpha, double w_max = 20.0);

double relaunch_factor(const RelaunchMode& mode, int k, double alpha);

}  // namespace slab
