#include "slab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slab/errors.hpp"
#include "slab/specfn.hpp"
#include "slab/stochastic.hpp"

namespace slab {

namespace {

void check_model(const WorkloadParams& params) {
  params.validate();
}

double service_moment_checked(const WorkloadParams& params, int m) {
  try {
    return service_moment(params.service_dist(), m);
  } catch (const InfiniteMomentError&) {
    throw InfiniteMomentError("service time B has no finite moment of order " +
                              std::to_string(m) + " (beta = " + std::to_string(params.beta) + ")");
  }
}

double orderstat_checked(int n, int k, double alpha, int m, const char* branch) {
  try {
    return orderstat_moment(n, k, alpha, m);
  } catch (const InfiniteMomentError&) {
    throw InfiniteMomentError(std::string(branch) + " branch: E[S_{" + std::to_string(n) + ":" +
                              std::to_string(k) + "}^" + std::to_string(m) + "] is infinite");
  }
}

// Regularized incomplete beta with exact endpoints.
double inc_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return specfn::reg_inc_beta(x, a, b);
}

double gamma_factor(int k, double alpha, int i) {
  const double kk = k;
  return std::exp(specfn::ln_gamma(kk + 1.0) + specfn::ln_gamma(1.0 - i / alpha) -
                  specfn::ln_gamma(kk + 1.0 - i / alpha));
}

void check_relaunch_args(int k, double b, double w, double alpha, const char* who) {
  if (k < 1) throw DomainError(std::string(who) + ": k must be >= 1");
  if (!(b > 0.0)) throw DomainError(std::string(who) + ": b must be positive");
  if (!(w >= 1.0)) throw DomainError(std::string(who) + ": w must be >= 1");
  if (!(alpha > 1.0)) throw DomainError(std::string(who) + ": alpha must be > 1");
}

void check_grid(std::span<const double> grid, double lower, const char* name) {
  if (grid.empty()) throw DomainError(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= lower)) throw DomainError(std::string(name) + " grid value out of range");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw DomainError(std::string(name) + " grid must be strictly increasing");
    }
  }
}

CurvePoint make_point(double param, const JobMoments& mom, const WorkloadParams& params,
                      double lambda, bool asymptotic) {
  CurvePoint pt;
  pt.param_value = param;
  pt.moments = mom;
  pt.c = params.total_capacity() * mom.latency_m1 / mom.cost_m1;
  pt.rho = system_load(lambda, params.num_nodes, params.capacity, mom.cost_m1);
  try {
    pt.estimate = mgc_response_time(mom.latency_m1, mom.latency_m2, mom.cost_m1, lambda,
                                    params.num_nodes, params.capacity, asymptotic);
  } catch (const InstabilityError&) {
    pt.estimate.reset();
  }
  return pt;
}

void pick_best(OptimizationResult& res) {
  for (const auto& pt : res.curve) {
    if (pt.unstable()) continue;
    // Strict comparison keeps the smaller parameter on ties.
    if (!res.best || pt.estimate->expected_T < res.best->expected_T) {
      res.best = pt.estimate;
      res.best_param = pt.param_value;
    }
  }
}

}  // namespace

double redsmall_latency_moment(const RedSmallModel& model, int m) {
  check_model(model.params);
  if (m != 1 && m != 2) throw DomainError("redsmall_latency_moment: m must be 1 or 2");
  if (!(model.r > 1.0)) throw DomainError("redsmall_latency_moment: r must be > 1");
  if (!(model.d >= 0.0)) throw DomainError("redsmall_latency_moment: d must be >= 0");
  const auto& p = model.params;
  const ServiceDist dist = p.service_dist();
  const ZipfDist kdist = p.task_count_dist();
  const double bm = service_moment_checked(p, m);
  double total = 0.0;
  for (int k = 1; k <= p.k_max; ++k) {
    const int n = expanded_task_count(model.r, k);
    const double below = service_partial_moment_below(dist, model.d / k, m);
    const double above = std::max(0.0, bm - below);
    double term = 0.0;
    if (below > 0.0) term += orderstat_checked(n, k, p.alpha, m, "redundant") * below;
    if (above > 0.0) term += orderstat_checked(k, k, p.alpha, m, "plain") * above;
    total += kdist.pmf(k) * term;
  }
  return total;
}

double redsmall_cost_mean(const RedSmallModel& model) {
  check_model(model.params);
  if (!(model.r > 1.0)) throw DomainError("redsmall_cost_mean: r must be > 1");
  if (!(model.d >= 0.0)) throw DomainError("redsmall_cost_mean: d must be >= 0");
  const auto& p = model.params;
  const ServiceDist dist = p.service_dist();
  const ZipfDist kdist = p.task_count_dist();
  const double b1 = service_moment_checked(p, 1);
  const double s1 = p.alpha / (p.alpha - 1.0);
  double total = 0.0;
  for (int k = 1; k <= p.k_max; ++k) {
    const int n = expanded_task_count(model.r, k);
    const double below = service_partial_moment_below(dist, model.d / k, 1);
    const double above = std::max(0.0, b1 - below);
    double term = 0.0;
    if (below > 0.0) term += coded_cost_mean(n, k, p.alpha) * below;
    if (above > 0.0) term += k * s1 * above;
    total += kdist.pmf(k) * term;
  }
  return total;
}

JobMoments redsmall_moments(const RedSmallModel& model) {
  return {redsmall_latency_moment(model, 1), redsmall_latency_moment(model, 2),
          redsmall_cost_mean(model)};
}

double system_load(double lambda, int num_nodes, double capacity, double cost_mean) {
  return lambda * cost_mean / (num_nodes * capacity);
}

double queueing_probability(double c, double rho, bool asymptotic) {
  if (!(c > 0.0)) throw DomainError("queueing_probability: c must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("queueing_probability: rho must be in (0, 1)");
  if (asymptotic) return rho;
  specfn::SpecFnTolerance tol;
  tol.max_iter = 500 + static_cast<int>(50.0 * std::sqrt(c));
  const double a = c * rho;
  const double t = std::log1p(-rho) + std::log(c) + a - c * std::log(a) +
                   specfn::log_upper_inc_gamma(c, a, tol);
  if (!std::isfinite(t)) throw ConvergenceError("queueing_probability: non-finite log term");
  return 1.0 / (1.0 + std::exp(t));
}

MgcEstimate mgc_response_time(double latency_m1, double latency_m2, double cost_m1, double lambda,
                              int num_nodes, double capacity, bool asymptotic) {
  if (!(latency_m1 > 0.0 && std::isfinite(latency_m1)) ||
      !(latency_m2 > 0.0 && std::isfinite(latency_m2))) {
    throw DomainError("mgc_response_time: latency moments must be finite and positive");
  }
  if (!(cost_m1 > 0.0 && std::isfinite(cost_m1))) {
    throw DomainError("mgc_response_time: cost must be finite and positive");
  }
  if (!(lambda > 0.0) || num_nodes < 1 || !(capacity > 0.0)) {
    throw DomainError("mgc_response_time: lambda, N and C must be positive");
  }
  MgcEstimate e;
  e.latency_m1 = latency_m1;
  e.latency_m2 = latency_m2;
  e.cost_m1 = cost_m1;
  e.asymptotic = asymptotic;
  e.c = num_nodes * capacity * latency_m1 / cost_m1;
  e.rho = lambda * latency_m1 / e.c;
  if (!(e.rho < 1.0)) {
    throw InstabilityError("mgc_response_time: load " + std::to_string(e.rho) + " >= 1", e.rho);
  }
  e.pr_queueing = queueing_probability(e.c, e.rho, asymptotic);
  const double scv_term = latency_m2 / (2.0 * latency_m1 * latency_m1);
  e.expected_T = latency_m1 + scv_term * e.pr_queueing * e.rho / (lambda * (1.0 - e.rho));
  return e;
}

double relaunch_latency_mean(int k, double b, double w, double alpha) {
  check_relaunch_args(k, b, w, alpha, "relaunch_latency_mean");
  const double tail = std::pow(w, -alpha);  // 1 - q
  const double none_left = -std::expm1(k * std::log1p(-tail));
  const double f1 = gamma_factor(k, alpha, 1);
  const double i1 = inc_beta(tail, 1.0 - 1.0 / alpha, k);
  return b * w * none_left + b * f1 * ((1.0 / w - 1.0) * i1 + 1.0);
}

double relaunch_latency_second(int k, double b, double w, double alpha) {
  check_relaunch_args(k, b, w, alpha, "relaunch_latency_second");
  if (!(alpha > 2.0)) {
    throw InfiniteMomentError("relaunch_latency_second: second moment needs alpha > 2");
  }
  const double tail = std::pow(w, -alpha);
  const double none_left = -std::expm1(k * std::log1p(-tail));
  const double f1 = gamma_factor(k, alpha, 1);
  const double f2 = gamma_factor(k, alpha, 2);
  const double i1 = inc_beta(tail, 1.0 - 1.0 / alpha, k);
  const double i2 = inc_beta(tail, 1.0 - 2.0 / alpha, k);
  const double tail1 = std::pow(tail, 1.0 / alpha);
  const double tail2 = std::pow(tail, 2.0 / alpha);
  return b * b *
         (w * w * none_left + f2 + 2.0 * w * f1 * tail1 * i1 + (1.0 - w * w) * f2 * tail2 * i2);
}

double relaunch_cost_mean(int k, double b, double w, double alpha) {
  check_relaunch_args(k, b, w, alpha, "relaunch_cost_mean");
  const double tail = std::pow(w, -alpha);
  return b * k * (alpha + alpha * tail - w * tail) / (alpha - 1.0);
}

JobMoments relaunch_moments_marginal(const RelaunchModel& model) {
  check_model(model.params);
  const auto& p = model.params;
  if (const auto* f = std::get_if<FixedW>(&model.mode)) {
    if (!(f->w >= 1.0)) throw DomainError("relaunch_moments_marginal: w must be >= 1");
  }
  if (!(p.alpha > 2.0)) {
    throw InfiniteMomentError("relaunch branch: latency second moment needs alpha > 2");
  }
  const double b1 = service_moment_checked(p, 1);
  const double b2 = service_moment_checked(p, 2);
  const ZipfDist kdist = p.task_count_dist();
  JobMoments out;
  for (int k = 1; k <= p.k_max; ++k) {
    const double w = relaunch_factor(model.mode, k, p.alpha);
    const double pk = kdist.pmf(k);
    out.latency_m1 += pk * relaunch_latency_mean(k, 1.0, w, p.alpha);
    out.latency_m2 += pk * relaunch_latency_second(k, 1.0, w, p.alpha);
    out.cost_m1 += pk * relaunch_cost_mean(k, 1.0, w, p.alpha);
  }
  out.latency_m1 *= b1;
  out.latency_m2 *= b2;
  out.cost_m1 *= b1;
  return out;
}

std::vector<double> default_d_grid() {
  std::vector<double> g{0.0};
  constexpr int kPoints = 40;
  for (int i = 0; i < kPoints; ++i) {
    g.push_back(std::pow(10.0, 1.0 + 3.0 * i / (kPoints - 1)));
  }
  g.push_back(1e6);
  return g;
}

std::vector<double> default_w_grid() {
  std::vector<double> g;
  constexpr int kPoints = 60;
  for (int i = 0; i < kPoints; ++i) g.push_back(1.0 + 11.0 * i / (kPoints - 1));
  g.push_back(1e6);
  return g;
}

OptimizationResult optimize_demand_threshold(const WorkloadParams& params, double r, double rho0,
                                             std::span<const double> d_grid, bool asymptotic) {
  check_grid(d_grid, 0.0, "d");
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw DomainError("optimize_demand_threshold: rho0 in (0,1)");
  OptimizationResult res;
  res.param_name = "d";
  res.rho0 = rho0;
  res.lambda = lambda_for_offered_load(rho0, params);
  res.asymptotic = asymptotic;
  for (double d : d_grid) {
    const JobMoments mom = redsmall_moments(RedSmallModel{params, r, d});
    res.curve.push_back(make_point(d, mom, params, res.lambda, asymptotic));
  }
  pick_best(res);
  return res;
}

OptimizationResult optimize_relaunch_factor(const WorkloadParams& params, double rho0,
                                            std::span<const double> w_grid, bool asymptotic) {
  check_grid(w_grid, 1.0, "w");
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw DomainError("optimize_relaunch_factor: rho0 in (0,1)");
  OptimizationResult res;
  res.param_name = "w";
  res.rho0 = rho0;
  res.lambda = lambda_for_offered_load(rho0, params);
  res.asymptotic = asymptotic;
  for (double w : w_grid) {
    const JobMoments mom = relaunch_moments_marginal(RelaunchModel{params, FixedW{w}});
    res.curve.push_back(make_point(w, mom, params, res.lambda, asymptotic));
  }
  pick_best(res);
  return res;
}

CurvePoint evaluate_relaunch(const WorkloadParams& params, double rho0, const RelaunchMode& mode,
                             bool asymptotic) {
  const double lambda = lambda_for_offered_load(rho0, params);
  const JobMoments mom = relaunch_moments_marginal(RelaunchModel{params, mode});
  const auto* f = std::get_if<FixedW>(&mode);
  return make_point(f ? f->w : std::numeric_limits<double>::quiet_NaN(), mom, params, lambda,
                    asymptotic);
}

}  // namespace slab
