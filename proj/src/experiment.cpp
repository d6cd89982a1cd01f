#include "slab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "slab/errors.hpp"
#include "slab/training.hpp"

namespace slab {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double get_num(const json& obj, const std::string& path, const char* key, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& path, const char* key, std::int64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(join(path, key), "expected an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_grid(const json& obj, const std::string& path, const char* key,
                             std::vector<double> def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(join(path, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

PolicyConfig parse_policy(const json& j, std::string& checkpoint) {
  const std::string path = "policy";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = get_str(j, path, "type", "");
  if (type == "redundant_none") {
    check_keys(j, path, {"type"});
    return RedundantNone{};
  }
  if (type == "redundant_all") {
    check_keys(j, path, {"type", "max_extra"});
    return RedundantAll{static_cast<int>(get_int(j, path, "max_extra", 3))};
  }
  if (type == "redundant_small") {
    check_keys(j, path, {"type", "r", "d"});
    return RedundantSmall{get_num(j, path, "r", 2.0), get_num(j, path, "d", 0.0)};
  }
  if (type == "straggler_relaunch") {
    check_keys(j, path, {"type", "w", "mode", "rule"});
    const std::string mode = get_str(j, path, "mode", "fixed");
    if (mode == "fixed") return StragglerRelaunch{FixedW{get_num(j, path, "w", 2.0)}};
    if (mode != "per_job") throw ConfigError("policy.mode", "expected fixed or per_job");
    const std::string rule = get_str(j, path, "rule", "closed_form");
    if (rule == "closed_form") return StragglerRelaunch{PerJobOptimalW{WRule::closed_form}};
    if (rule == "latency_argmin") return StragglerRelaunch{PerJobOptimalW{WRule::latency_argmin}};
    throw ConfigError("policy.rule", "expected closed_form or latency_argmin");
  }
  if (type == "rl") {
    check_keys(j, path, {"type", "checkpoint"});
    checkpoint = get_str(j, path, "checkpoint", "");
    if (checkpoint.empty()) throw ConfigError("policy.checkpoint", "required for the rl policy");
    return RLPolicy{};
  }
  throw ConfigError("policy.type", "unknown policy '" + type + "'");
}

PolicyConfig resolve_policy(const ExperimentConfig& cfg) {
  if (!std::holds_alternative<RLPolicy>(cfg.policy) || std::get<RLPolicy>(cfg.policy).net) {
    return cfg.policy;
  }
  std::ifstream in(cfg.checkpoint);
  if (!in) throw ConfigError("policy.checkpoint", "cannot open " + cfg.checkpoint);
  return RLPolicy{std::make_shared<const QNetwork>(load_checkpoint(in))};
}

std::vector<double> rho0_list(const ExperimentConfig& cfg) {
  if (!cfg.analysis.rho0_grid.empty()) return cfg.analysis.rho0_grid;
  return {cfg.effective_rho0()};
}

OptimizationResult run_optimizer(const ExperimentConfig& cfg, double rho0, bool asymptotic) {
  if (cfg.analysis.model == "redsmall") {
    return optimize_demand_threshold(cfg.workload, cfg.analysis.r, rho0, cfg.analysis.d_grid,
                                     asymptotic);
  }
  return optimize_relaunch_factor(cfg.workload, rho0, cfg.analysis.w_grid, asymptotic);
}

Table optimum_table() {
  return Table({"rho0", "param_name", "variant", "best_param", "expected_T", "pr_queueing", "rho"});
}

void add_optimum_row(Table& t, const OptimizationResult& res) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.add_row({fmt(res.rho0), res.param_name, res.asymptotic ? "asymptotic" : "mgc",
             fmt(res.best_param.value_or(nan)), fmt(res.best ? res.best->expected_T : nan),
             fmt(res.best ? res.best->pr_queueing : nan), fmt(res.best ? res.best->rho : nan)});
}

}  // namespace

void ExperimentConfig::validate() const {
  workload.validate();
  if (rho0 && !(*rho0 > 0.0 && *rho0 < 1.0)) throw ConfigError("workload.rho0", "must be in (0, 1)");
  validate_policy(std::holds_alternative<RLPolicy>(policy) && !checkpoint.empty()
                      ? PolicyConfig{RedundantNone{}}
                      : policy);
  sim.validate();
  if (sim.num_jobs < 1) throw ConfigError("sim.num_jobs", "must be >= 1");
  if (!(extra_jobs_fraction >= 0.0)) throw ConfigError("sim.extra_jobs_fraction", "must be >= 0");
  if (runs < 1) throw ConfigError("runs", "must be >= 1");
  if (analysis.model != "redsmall" && analysis.model != "relaunch") {
    throw ConfigError("analysis.model", "expected redsmall or relaunch");
  }
  if (!(analysis.r > 1.0)) throw ConfigError("analysis.r", "must be > 1");
  auto check_grid = [](const std::vector<double>& g, double lo, const char* path) {
    if (g.empty()) throw ConfigError(path, "must not be empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] >= lo)) throw ConfigError(path, "value out of range");
      if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError(path, "must be strictly increasing");
    }
  };
  check_grid(analysis.d_grid, 0.0, "analysis.d_grid");
  check_grid(analysis.w_grid, 1.0, "analysis.w_grid");
  for (double r0 : analysis.rho0_grid) {
    if (!(r0 > 0.0 && r0 < 1.0)) throw ConfigError("analysis.rho0_grid", "values must be in (0, 1)");
  }
  for (double r0 : compare_rho0) {
    if (!(r0 > 0.0 && r0 < 1.0)) throw ConfigError("compare.rho0_grid", "values must be in (0, 1)");
  }
  rl.validate();
  if (format != "csv" && format != "json") throw ConfigError("output.format", "expected csv or json");
}

double ExperimentConfig::effective_rho0() const {
  return rho0 ? *rho0 : offered_load(workload);
}

WorkloadParams ExperimentConfig::resolved_workload() const {
  WorkloadParams p = workload;
  if (rho0) p.lambda = lambda_for_offered_load(*rho0, workload);
  return p;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"workload", "policy", "sim", "runs", "seed", "analysis", "rl", "compare", "output"});
  ExperimentConfig cfg;

  const json w = root.value("workload", json::object());
  check_keys(w, "workload",
             {"rho0", "lambda", "num_nodes", "capacity", "k_max", "b_min", "beta", "alpha", "b_max"});
  if (w.contains("rho0") == w.contains("lambda")) {
    throw ConfigError("workload", "exactly one of rho0 and lambda must be given");
  }
  auto& p = cfg.workload;
  if (w.contains("rho0")) cfg.rho0 = get_num(w, "workload", "rho0", 0.0);
  p.lambda = get_num(w, "workload", "lambda", 1.0);
  p.num_nodes = static_cast<int>(get_int(w, "workload", "num_nodes", p.num_nodes));
  p.capacity = get_num(w, "workload", "capacity", p.capacity);
  p.k_max = static_cast<int>(get_int(w, "workload", "k_max", p.k_max));
  p.b_min = get_num(w, "workload", "b_min", p.b_min);
  p.beta = get_num(w, "workload", "beta", p.beta);
  p.alpha = get_num(w, "workload", "alpha", p.alpha);
  p.b_max = get_num(w, "workload", "b_max", p.b_max);

  if (root.contains("policy")) cfg.policy = parse_policy(root.at("policy"), cfg.checkpoint);

  cfg.runs = static_cast<int>(get_int(root, "", "runs", 1));
  cfg.seed = get_u64(root, "", "seed", 1);

  const json s = root.value("sim", json::object());
  check_keys(s, "sim",
             {"num_jobs", "warmup_fraction", "queue_limit", "checkpoint_count",
              "extra_jobs_fraction", "write_jobs", "threads"});
  cfg.sim.num_jobs = get_int(s, "sim", "num_jobs", 20000);
  cfg.sim.warmup_fraction = get_num(s, "sim", "warmup_fraction", 0.0);
  const auto qlim = get_int(s, "sim", "queue_limit", 1000);
  if (qlim < 1) throw ConfigError("sim.queue_limit", "must be >= 1");
  cfg.sim.queue_limit = static_cast<std::size_t>(qlim);
  cfg.sim.checkpoint_count = static_cast<int>(get_int(s, "sim", "checkpoint_count", 10));
  cfg.extra_jobs_fraction = get_num(s, "sim", "extra_jobs_fraction", 0.1);
  cfg.write_jobs = get_bool(s, "sim", "write_jobs", false);
  cfg.threads = static_cast<unsigned>(get_int(s, "sim", "threads", 0));

  const json a = root.value("analysis", json::object());
  check_keys(a, "analysis", {"model", "r", "d_grid", "w_grid", "rho0_grid"});
  cfg.analysis.model = get_str(a, "analysis", "model", "redsmall");
  cfg.analysis.r = get_num(a, "analysis", "r", 2.0);
  cfg.analysis.d_grid = get_grid(a, "analysis", "d_grid", default_d_grid());
  cfg.analysis.w_grid = get_grid(a, "analysis", "w_grid", default_w_grid());
  cfg.analysis.rho0_grid = get_grid(a, "analysis", "rho0_grid", {});

  const json r = root.value("rl", json::object());
  check_keys(r, "rl",
             {"gamma", "learn_rate", "episode_jobs", "batch_size", "train_repeats",
              "target_sync_period", "total_episodes", "huber_delta", "replay_capacity",
              "reward_clip", "hidden", "seed"});
  auto& t = cfg.rl;
  t.gamma = get_num(r, "rl", "gamma", t.gamma);
  t.learn_rate = get_num(r, "rl", "learn_rate", t.learn_rate);
  t.episode_jobs = static_cast<int>(get_int(r, "rl", "episode_jobs", t.episode_jobs));
  t.batch_size = static_cast<int>(get_int(r, "rl", "batch_size", t.batch_size));
  t.train_repeats = static_cast<int>(get_int(r, "rl", "train_repeats", t.train_repeats));
  t.target_sync_period =
      static_cast<int>(get_int(r, "rl", "target_sync_period", t.target_sync_period));
  t.total_episodes = static_cast<int>(get_int(r, "rl", "total_episodes", t.total_episodes));
  t.huber_delta = get_num(r, "rl", "huber_delta", t.huber_delta);
  const auto cap = get_int(r, "rl", "replay_capacity", static_cast<std::int64_t>(t.replay_capacity));
  if (cap < 1) throw ConfigError("rl.replay_capacity", "must be >= 1");
  t.replay_capacity = static_cast<std::size_t>(cap);
  t.reward_clip = get_num(r, "rl", "reward_clip", t.reward_clip);
  if (r.contains("hidden")) {
    t.hidden.clear();
    for (double h : get_grid(r, "rl", "hidden", {})) t.hidden.push_back(static_cast<int>(h));
  }
  t.seed = get_u64(r, "rl", "seed", cfg.seed);

  const json c = root.value("compare", json::object());
  check_keys(c, "compare", {"rho0_grid"});
  cfg.compare_rho0 = get_grid(c, "compare", "rho0_grid", cfg.compare_rho0);

  const json o = root.value("output", json::object());
  check_keys(o, "output", {"dir", "format"});
  cfg.out_dir = get_str(o, "output", "dir", cfg.out_dir);
  cfg.format = get_str(o, "output", "format", cfg.format);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  if (!cfg.checkpoint.empty() && std::filesystem::path(cfg.checkpoint).is_relative()) {
    cfg.checkpoint = (path.parent_path() / cfg.checkpoint).string();
  }
  return cfg;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<JobSpec> make_workload(const WorkloadParams& params, std::int64_t num_jobs,
                                   double extra_fraction, std::uint64_t seed) {
  RngStream rng = RngStream(seed).derive(1);
  const auto extra = static_cast<std::int64_t>(std::ceil(extra_fraction * num_jobs));
  return generate_workload(params, num_jobs + extra, rng);
}

SimMetrics simulate_once(const RunSpec& spec, std::uint64_t seed) {
  const auto workload =
      make_workload(spec.params, spec.sim.num_jobs, spec.extra_jobs_fraction, seed);
  SimConfig sim = spec.sim;
  sim.seed = seed;
  return run_simulation(workload, spec.policy, spec.params, sim);
}

std::vector<SimMetrics> simulate_runs(const RunSpec& spec, int runs, std::uint64_t base_seed,
                                      unsigned threads) {
  std::vector<SimMetrics> out(static_cast<std::size_t>(runs));
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = simulate_once(spec, base_seed + i); });
  return out;
}

double ci95_halfwidth(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  return boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
}

Aggregate aggregate(const std::vector<SimMetrics>& runs) {
  Aggregate a;
  if (runs.empty()) return a;
  std::vector<double> T, sd;
  const double n = static_cast<double>(runs.size());
  for (const auto& m : runs) {
    T.push_back(m.mean_T);
    sd.push_back(m.mean_slowdown);
    a.p99_slowdown += m.p99_slowdown / n;
    a.utilization += m.utilization / n;
    a.unstable = a.unstable || m.unstable;
  }
  for (double x : T) a.mean_T += x / n;
  for (double x : sd) a.mean_slowdown += x / n;
  a.ci95_T = ci95_halfwidth(T);
  a.ci95_slowdown = ci95_halfwidth(sd);
  for (std::size_t i = 0; i < tail_grid().size(); ++i) {
    TailPoint tp{tail_grid()[i], 0.0};
    for (const auto& m : runs) {
      if (i < m.tail.size()) tp.prob += m.tail[i].prob / n;
    }
    a.tail.push_back(tp);
  }
  return a;
}

Table summary_table() {
  return Table({"policy", "rho0", "param_value", "mean_T", "ci95_T", "mean_slowdown",
                "ci95_slowdown", "p99_slowdown", "unstable"});
}

void add_summary_row(Table& t, const std::string& policy, double rho0, double param,
                     const Aggregate& a) {
  t.add_row({policy, fmt(rho0), fmt(param), fmt(a.mean_T), fmt(a.ci95_T), fmt(a.mean_slowdown),
             fmt(a.ci95_slowdown), fmt(a.p99_slowdown), fmt(a.unstable)});
}

Table curve_table() {
  return Table({"rho0", "param_name", "param_value", "latency_m1", "latency_m2", "cost_m1", "c",
                "rho", "pr_queueing", "expected_T", "unstable"});
}

void add_curve_rows(Table& t, const OptimizationResult& res) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pt : res.curve) {
    const auto& e = pt.estimate;
    t.add_row({fmt(res.rho0), res.param_name, fmt(pt.param_value), fmt(pt.moments.latency_m1),
               fmt(pt.moments.latency_m2), fmt(pt.moments.cost_m1), fmt(pt.c), fmt(pt.rho),
               fmt(e ? e->pr_queueing : nan), fmt(e ? e->expected_T : nan), fmt(pt.unstable())});
  }
}

Outputs cmd_analyze(const ExperimentConfig& cfg) {
  Table mgc = curve_table(), asym = curve_table(), best = optimum_table();
  for (double rho0 : rho0_list(cfg)) {
    const auto a = run_optimizer(cfg, rho0, false);
    const auto b = run_optimizer(cfg, rho0, true);
    add_curve_rows(mgc, a);
    add_curve_rows(asym, b);
    add_optimum_row(best, a);
    add_optimum_row(best, b);
  }
  return {{"curve_mgc", mgc}, {"curve_asymptotic", asym}, {"optimum", best}};
}

Outputs cmd_optimize(const ExperimentConfig& cfg) {
  Table curve = curve_table(), best = optimum_table();
  for (double rho0 : rho0_list(cfg)) {
    const auto a = run_optimizer(cfg, rho0, false);
    add_curve_rows(curve, a);
    add_optimum_row(best, a);
  }
  return {{"curve", curve}, {"optimum", best}};
}

Outputs cmd_simulate(const ExperimentConfig& cfg) {
  RunSpec spec{cfg.resolved_workload(), resolve_policy(cfg), cfg.sim, cfg.extra_jobs_fraction};
  const auto runs = simulate_runs(spec, cfg.runs, cfg.seed, cfg.threads);
  const double rho0 = cfg.effective_rho0();
  const std::string name = policy_name(spec.policy);
  const double param = policy_param(spec.policy);

  Table per_run({"run", "seed", "policy", "rho0", "param_value", "mean_T", "mean_slowdown",
                 "p99_slowdown", "utilization", "jobs", "unstable"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& m = runs[i];
    per_run.add_row({fmt(static_cast<std::int64_t>(i)),
                     fmt(static_cast<std::int64_t>(cfg.seed + i)), name, fmt(rho0), fmt(param),
                     fmt(m.mean_T), fmt(m.mean_slowdown), fmt(m.p99_slowdown), fmt(m.utilization),
                     fmt(static_cast<std::int64_t>(m.jobs_measured)), fmt(m.unstable)});
  }
  const Aggregate agg = aggregate(runs);
  Table summary = summary_table();
  add_summary_row(summary, name, rho0, param, agg);
  Table tail({"x", "prob"});
  for (const auto& tp : agg.tail) tail.add_row({fmt(tp.x), fmt(tp.prob)});

  Outputs out{{"summary", summary}, {"runs", per_run}, {"tail", tail}};
  if (cfg.write_jobs) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      Table jobs({"job_id", "arrival", "dispatch", "finish", "k", "n", "b", "relaunched",
                  "slowdown"});
      for (const auto& r : runs[i].records) {
        jobs.add_row({fmt(r.spec.job_id), fmt(r.spec.arrival_time), fmt(r.dispatch_time),
                      fmt(r.finish_time), fmt(r.spec.k), fmt(r.n), fmt(r.spec.b),
                      fmt(r.relaunch_count), fmt(r.slowdown)});
      }
      out.emplace_back("jobs_run" + std::to_string(i), std::move(jobs));
    }
  }
  return out;
}

Outputs cmd_train(const ExperimentConfig& cfg, QNetwork* trained) {
  const TrainingResult res =
      run_training(cfg.workload, cfg.effective_rho0(), cfg.rl, cfg.sim.queue_limit);
  if (trained) *trained = res.net;
  Table curve({"episode", "mean_loss", "mean_reward"});
  for (const auto& e : res.curve) {
    curve.add_row({fmt(e.episode), fmt(e.mean_loss), fmt(e.mean_reward)});
  }
  Table status({"episodes", "unstable", "reason"});
  std::string reason = res.unstable_reason;
  std::replace(reason.begin(), reason.end(), ',', ';');
  status.add_row({fmt(static_cast<int>(res.curve.size())), fmt(res.unstable), reason});
  return {{"learning_curve", curve}, {"training_status", status}};
}

Outputs cmd_compare(const ExperimentConfig& cfg) {
  Table summary = summary_table();
  Table optimum({"rho0", "d_star", "w_star"});
  for (double rho0 : cfg.compare_rho0) {
    const auto d_opt =
        optimize_demand_threshold(cfg.workload, cfg.analysis.r, rho0, cfg.analysis.d_grid);
    const auto w_opt = optimize_relaunch_factor(cfg.workload, rho0, cfg.analysis.w_grid);
    const double d_star = d_opt.best_param.value_or(0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    optimum.add_row({fmt(rho0), fmt(d_star), fmt(w_opt.best_param.value_or(nan))});

    std::vector<PolicyConfig> policies{RedundantNone{}, RedundantAll{},
                                       RedundantSmall{cfg.analysis.r, d_star}};
    if (w_opt.best_param) policies.push_back(StragglerRelaunch{FixedW{*w_opt.best_param}});

    WorkloadParams params = cfg.workload;
    params.lambda = lambda_for_offered_load(rho0, cfg.workload);
    for (const auto& pol : policies) {
      // Same seeds for every policy in the row.
      RunSpec spec{params, pol, cfg.sim, cfg.extra_jobs_fraction};
      const auto runs = simulate_runs(spec, cfg.runs, cfg.seed, cfg.threads);
      add_summary_row(summary, policy_name(pol), rho0, policy_param(pol), aggregate(runs));
    }
  }
  return {{"compare", summary}, {"optimum", optimum}};
}

void write_outputs(const Outputs& outputs, const std::filesystem::path& dir,
                   const std::string& format) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : outputs) {
    const auto path = dir / (name + "." + format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    if (format == "json") {
      table.write_json(out);
    } else {
      table.write_csv(out);
    }
  }
}

}  // namespace slab
