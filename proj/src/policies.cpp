#include "slab/policies.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "slab/analysis.hpp"
#include "slab/errors.hpp"
#include "slab/rl.hpp"
#include "slab/specfn.hpp"

namespace slab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_mode(const RelaunchMode& mode) {
  if (const auto* f = std::get_if<FixedW>(&mode)) {
    if (!(f->w >= 1.0)) throw ConfigError("policy.w", "must be >= 1");
  }
}

}  // namespace

void validate_policy(const PolicyConfig& policy) {
  std::visit(overloaded{
                 [](const RedundantNone&) {},
                 [](const RedundantAll& p) {
                   if (p.max_extra < 0) throw ConfigError("policy.max_extra", "must be >= 0");
                 },
                 [](const RedundantSmall& p) {
                   if (!(p.r > 1.0)) throw ConfigError("policy.r", "must be > 1");
                   if (!(p.d >= 0.0)) throw ConfigError("policy.d", "must be >= 0");
                 },
                 [](const StragglerRelaunch& p) { validate_mode(p.mode); },
                 [](const RLPolicy& p) {
                   if (!p.net) throw ConfigError("policy.network", "no trained network attached");
                 },
             },
             policy);
}

std::string policy_name(const PolicyConfig& policy) {
  return std::visit(overloaded{
                        [](const RedundantNone&) { return std::string("redundant_none"); },
                        [](const RedundantAll&) { return std::string("redundant_all"); },
                        [](const RedundantSmall&) { return std::string("redundant_small"); },
                        [](const StragglerRelaunch& p) {
                          return std::string(std::holds_alternative<FixedW>(p.mode)
                                                 ? "straggler_relaunch"
                                                 : "straggler_relaunch_per_job");
                        },
                        [](const RLPolicy&) { return std::string("rl"); },
                    },
                    policy);
}

double policy_param(const PolicyConfig& policy) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return std::visit(overloaded{
                        [](const RedundantNone&) { return nan; },
                        [](const RedundantAll& p) { return static_cast<double>(p.max_extra); },
                        [](const RedundantSmall& p) { return p.d; },
                        [](const StragglerRelaunch& p) {
                          const auto* f = std::get_if<FixedW>(&p.mode);
                          return f ? f->w : nan;
                        },
                        [](const RLPolicy&) { return nan; },
                    },
                    policy);
}

int expanded_task_count(double r, int k) {
  return static_cast<int>(std::ceil(r * k - 1e-9));
}

RedundancyDecision decide_redundancy(const PolicyConfig& policy, const JobSpec& job,
                                     const ClusterView& view) {
  return std::visit(
      overloaded{
          [&](const RedundantNone&) { return RedundancyDecision{job.k, std::nullopt}; },
          [&](const RedundantAll& p) {
            return RedundancyDecision{job.k + p.max_extra, std::nullopt};
          },
          [&](const RedundantSmall& p) {
            const int n = job_demand(job) <= p.d ? expanded_task_count(p.r, job.k) : job.k;
            return RedundancyDecision{n, std::nullopt};
          },
          [&](const StragglerRelaunch& p) {
            const double w = relaunch_factor(p.mode, job.k, view.slowdown_tail_index);
            return RedundancyDecision{job.k, w * job.b};
          },
          [&](const RLPolicy& p) {
            const int a = greedy_action(p.net->forward(encode_state(view, job)));
            return RedundancyDecision{job.k + a, std::nullopt};
          },
      },
      policy);
}

double per_job_optimal_w(int k, double alpha) {
  if (!(alpha > 1.0)) throw DomainError("per_job_optimal_w: alpha must be > 1");
  if (k < 1) throw DomainError("per_job_optimal_w: k must be >= 1");
  const double kk = k;
  const double lg = specfn::ln_gamma(kk + 1.0) + specfn::ln_gamma(1.0 - 1.0 / alpha) -
                    specfn::ln_gamma(kk + 1.0 - 1.0 / alpha);
  return std::max(1.0, std::exp(0.5 * lg));
}

double latency_argmin_w(int k, double alpha, double w_max) {
  if (!(w_max > 1.0)) throw DomainError("latency_argmin_w: w_max must be > 1");
  auto f = [&](double w) { return relaunch_latency_mean(k, 1.0, w, alpha); };
  constexpr int kCoarse = 400;
  const double step = (w_max - 1.0) / kCoarse;
  int best = 0;
  double best_val = f(1.0);
  for (int i = 1; i <= kCoarse; ++i) {
    const double v = f(1.0 + i * step);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = 1.0 + std::max(0, best - 1) * step;
  double hi = 1.0 + std::min(kCoarse, best + 1) * step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  const double w = 0.5 * (lo + hi);
  return f(w) <= best_val ? w : 1.0 + best * step;
}

double relaunch_factor(const RelaunchMode& mode, int k, double alpha) {
  if (const auto* f = std::get_if<FixedW>(&mode)) return f->w;
  const auto& p = std::get<PerJobOptimalW>(mode);
  if (p.rule == WRule::closed_form) return per_job_optimal_w(k, alpha);
  thread_local std::map<std::pair<int, double>, double> cache;
  auto [it, fresh] = cache.try_emplace({k, alpha}, 0.0);
  if (fresh) it->second = latency_argmin_w(k, alpha);
  return it->second;
}

}  // namespace slab
