#include "slab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <queue>

#include "slab/errors.hpp"

namespace slab {

void SimConfig::validate() const {
  if (num_jobs < 0) throw ConfigError("sim.num_jobs", "must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("sim.warmup_fraction", "must be in [0, 1)");
  }
  if (queue_limit < 1) throw ConfigError("sim.queue_limit", "must be >= 1");
  if (checkpoint_count < 2) throw ConfigError("sim.checkpoint_count", "must be >= 2");
  if (straggle_override) {
    if (straggle_override->factors.empty()) {
      throw ConfigError("sim.straggle_override", "must not be empty");
    }
    for (double s : straggle_override->factors) {
      if (!(s >= 1.0)) throw ConfigError("sim.straggle_override", "factors must be >= 1");
    }
  }
}

const std::vector<double>& tail_grid() {
  static const std::vector<double> grid{1, 1.5, 2, 3, 5, 10, 20, 50, 100};
  return grid;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct Event {
  double time;
  std::uint64_t seq;
  EventType type;
  std::int64_t id;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

struct JobState {
  JobRecord rec;
  std::vector<std::int64_t> task_ids;
  int completed = 0;
  bool finished = false;
};

class Engine {
 public:
  Engine(std::span<const JobSpec> workload, Scheduler& scheduler, const WorkloadParams& params,
         const SimConfig& cfg)
      : workload_(workload),
        scheduler_(scheduler),
        params_(params),
        cfg_(cfg),
        rng_(RngStream(cfg.seed).derive(0x57a6)),
        slowdown_(params.slowdown_dist()),
        nodes_(make_cluster(params.num_nodes, params.capacity)) {
    target_ = cfg.num_jobs == 0
                  ? workload.size()
                  : std::min(workload.size(), static_cast<std::size_t>(cfg.num_jobs));
    jobs_.resize(workload.size());
    for (std::size_t i = 0; i < workload.size(); ++i) jobs_[i].rec.spec = workload[i];
    if (target_ > 0) horizon_ = workload[target_ - 1].arrival_time;
  }

  SimMetrics run() {
    SimMetrics m;
    if (target_ == 0) return m;
    push(workload_[0].arrival_time, EventType::job_arrival, 0);
    while (!events_.empty() && finished_counted_ < target_ && !aborted_ &&
           !scheduler_.done()) {
      const Event ev = events_.top();
      events_.pop();
      advance(ev.time);
      ++processed_;
      if (cfg_.record_events) log_.push_back({ev.time, ev.type, ev.id});
      switch (ev.type) {
        case EventType::job_arrival:
          on_arrival(static_cast<std::size_t>(ev.id));
          break;
        case EventType::task_complete:
          on_task_complete(ev.id);
          break;
        case EventType::relaunch_timer:
          on_relaunch_timer(static_cast<std::size_t>(ev.id));
          break;
      }
      if (cfg_.check_invariants) check_invariants();
    }
    return collect();
  }

 private:
  void push(double t, EventType type, std::int64_t id) { events_.push({t, seq_++, type, id}); }

  void advance(double t) {
    const double a = std::min(now_, horizon_);
    const double b = std::min(t, horizon_);
    if (b > a) busy_area_ += occupied_total_ * (b - a);
    now_ = t;
  }

  double draw_straggle() {
    if (cfg_.straggle_override) {
      const auto& f = cfg_.straggle_override->factors;
      return f[override_pos_++ % f.size()];
    }
    return sample(slowdown_, rng_);
  }

  void on_arrival(std::size_t idx) {
    if (idx + 1 < workload_.size()) {
      push(workload_[idx + 1].arrival_time, EventType::job_arrival,
           static_cast<std::int64_t>(idx + 1));
    }
    queue_.push_back(idx);
    try_dispatch();
    if (queue_.size() > cfg_.queue_limit) {
      aborted_ = true;
      reason_ = "queue length exceeded " + std::to_string(cfg_.queue_limit);
    }
  }

  ClusterView view() const {
    return ClusterView{std::span<const NodeState>(nodes_), params_.alpha, queue_.size()};
  }

  void try_dispatch() {
    while (!queue_.empty()) {
      const std::size_t idx = queue_.front();
      JobState& job = jobs_[idx];
      const ClusterView v = view();
      const RedundancyDecision dec = scheduler_.decide(job.rec.spec, v);
      if (dec.n < job.rec.spec.k) throw InternalError("scheduler returned n < k");
      if (dec.n * job.rec.spec.r_cap > params_.total_capacity()) {
        throw DomainError("job " + std::to_string(job.rec.spec.job_id) +
                          " needs more capacity than the cluster has");
      }
      const auto placement = place_tasks(nodes_, dec.n, job.rec.spec.r_cap);
      last_head_n_ = dec.n;
      if (!placement) return;
      scheduler_.on_dispatch(job.rec.spec, dec, v);
      queue_.pop_front();
      start_job(idx, dec, *placement);
    }
  }

  std::int64_t start_task(std::size_t idx, int node_id, bool is_relaunch) {
    JobState& job = jobs_[idx];
    TaskRecord t;
    t.task_id = static_cast<std::int64_t>(tasks_.size());
    t.job_id = job.rec.spec.job_id;
    t.node_id = node_id;
    t.start_time = now_;
    t.straggle_factor = draw_straggle();
    t.completion_time = now_ + t.straggle_factor * job.rec.spec.b;
    t.is_relaunch = is_relaunch;
    tasks_.push_back(t);
    task_job_.push_back(idx);
    push(t.completion_time, EventType::task_complete, t.task_id);
    return t.task_id;
  }

  void start_job(std::size_t idx, const RedundancyDecision& dec, const std::vector<int>& nodes) {
    JobState& job = jobs_[idx];
    job.rec.n = dec.n;
    job.rec.dispatch_time = now_;
    const double r_cap = job.rec.spec.r_cap;
    for (int node_id : nodes) {
      const std::int64_t id = start_task(idx, node_id, false);
      NodeState& node = nodes_[static_cast<std::size_t>(node_id)];
      node.occupied += r_cap;
      node.running.push_back(id);
      occupied_total_ += r_cap;
      job.task_ids.push_back(id);
    }
    if (dec.relaunch_time) {
      push(now_ + *dec.relaunch_time, EventType::relaunch_timer, static_cast<std::int64_t>(idx));
    }
  }

  // Ends a task's hold on its node and charges the held time to the job.
  void stop_task(TaskRecord& t, TaskStatus status, bool release) {
    JobState& job = jobs_[task_job_[static_cast<std::size_t>(t.task_id)]];
    t.status = status;
    t.completion_time = now_;
    job.rec.cost += (now_ - t.start_time) * job.rec.spec.r_cap;
    if (!release) return;
    NodeState& node = nodes_[static_cast<std::size_t>(t.node_id)];
    node.occupied -= job.rec.spec.r_cap;
    occupied_total_ -= job.rec.spec.r_cap;
    auto it = std::find(node.running.begin(), node.running.end(), t.task_id);
    if (it == node.running.end()) throw InternalError("task missing from its node");
    node.running.erase(it);
  }

  void on_task_complete(std::int64_t task_id) {
    TaskRecord& t = tasks_[static_cast<std::size_t>(task_id)];
    if (t.status != TaskStatus::running) return;  // cancelled or relaunched meanwhile
    const std::size_t idx = task_job_[static_cast<std::size_t>(task_id)];
    JobState& job = jobs_[idx];
    stop_task(t, TaskStatus::completed, true);
    ++job.completed;
    if (job.completed > job.rec.spec.k) throw InternalError("more than k completions");
    if (job.completed == job.rec.spec.k) finish_job(idx);
    try_dispatch();
  }

  void finish_job(std::size_t idx) {
    JobState& job = jobs_[idx];
    for (std::int64_t id : job.task_ids) {
      TaskRecord& t = tasks_[static_cast<std::size_t>(id)];
      if (t.status == TaskStatus::running) stop_task(t, TaskStatus::cancelled, true);
    }
    job.finished = true;
    job.rec.finish_time = now_;
    job.rec.slowdown = job.rec.response_time() / job.rec.spec.b;
    if (idx < target_) ++finished_counted_;
    scheduler_.on_job_finished(job.rec);
  }

  void on_relaunch_timer(std::size_t idx) {
    JobState& job = jobs_[idx];
    if (job.finished) return;
    for (std::int64_t& id : job.task_ids) {
      TaskRecord& old = tasks_[static_cast<std::size_t>(id)];
      if (old.status != TaskStatus::running || old.is_relaunch) continue;
      stop_task(old, TaskStatus::relaunched, false);
      const int node_id = old.node_id;
      const std::int64_t fresh = start_task(idx, node_id, true);
      // The new copy inherits the reservation.
      auto& running = nodes_[static_cast<std::size_t>(node_id)].running;
      *std::find(running.begin(), running.end(), id) = fresh;
      id = fresh;
      ++job.rec.relaunch_count;
    }
  }

  void check_invariants() const {
    double running_total = 0.0;
    for (const auto& node : nodes_) {
      if (node.occupied < -1e-9 || node.occupied > node.capacity + 1e-9) {
        throw InternalError("node occupancy out of range");
      }
      double held = 0.0;
      for (std::int64_t id : node.running) {
        const TaskRecord& t = tasks_[static_cast<std::size_t>(id)];
        if (t.status != TaskStatus::running) throw InternalError("stale task holds capacity");
        held += jobs_[task_job_[static_cast<std::size_t>(id)]].rec.spec.r_cap;
      }
      if (std::fabs(held - node.occupied) > 1e-9) throw InternalError("occupancy mismatch");
      running_total += held;
    }
    if (std::fabs(running_total - occupied_total_) > 1e-6) {
      throw InternalError("total occupancy mismatch");
    }
    if (!queue_.empty() && !aborted_) {
      const auto& head = jobs_[queue_.front()].rec.spec;
      if (place_tasks(nodes_, last_head_n_, head.r_cap)) {
        throw InternalError("dispatchable queue head left waiting");
      }
    }
  }

  SimMetrics collect() {
    std::vector<JobRecord> records;
    for (std::size_t i = 0; i < target_; ++i) {
      if (jobs_[i].finished) records.push_back(jobs_[i].rec);
    }
    SimMetrics m;
    if (!records.empty()) {
      const double warm = aborted_ && records.size() < 2 ? 0.0 : cfg_.warmup_fraction;
      m = summarize(records, warm);
    }
    m.events_processed = processed_;
    m.events = std::move(log_);
    if (cfg_.keep_tasks) m.tasks = tasks_;
    const double span = std::min(now_, horizon_);
    m.utilization = span > 0.0 ? busy_area_ / (params_.total_capacity() * span) : 0.0;
    if (aborted_) {
      m.unstable = true;
      m.unstable_reason = reason_;
    } else if (records.size() >= static_cast<std::size_t>(2 * cfg_.checkpoint_count)) {
      // Strictly growing mean response time over every window.
      const std::size_t w = records.size() / static_cast<std::size_t>(cfg_.checkpoint_count);
      double prev = -1.0;
      bool growing = true;
      for (int c = 0; c < cfg_.checkpoint_count && growing; ++c) {
        double s = 0.0;
        for (std::size_t i = c * w; i < (c + 1) * w; ++i) s += records[i].response_time();
        const double mean = s / static_cast<double>(w);
        growing = mean > prev;
        prev = mean;
      }
      if (growing) {
        m.unstable = true;
        m.unstable_reason = "mean response time grows across all checkpoints";
      }
    }
    return m;
  }

  std::span<const JobSpec> workload_;
  Scheduler& scheduler_;
  const WorkloadParams& params_;
  const SimConfig& cfg_;
  RngStream rng_;
  ParetoDist slowdown_;
  std::vector<NodeState> nodes_;
  std::vector<JobState> jobs_;
  std::vector<TaskRecord> tasks_;
  std::vector<std::size_t> task_job_;
  std::deque<std::size_t> queue_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
  std::vector<EventLogEntry> log_;
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  std::size_t override_pos_ = 0;
  std::size_t target_ = 0;
  std::size_t finished_counted_ = 0;
  int last_head_n_ = 0;
  double now_ = 0.0;
  double horizon_ = 0.0;
  double busy_area_ = 0.0;
  double occupied_total_ = 0.0;
  bool aborted_ = false;
  std::string reason_;
};

}  // namespace

SimMetrics summarize(std::span<const JobRecord> records, double warmup_fraction) {
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw DomainError("summarize: warmup_fraction must be in [0, 1)");
  }
  std::vector<JobRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const JobRecord& a, const JobRecord& b) {
    return a.spec.job_id < b.spec.job_id;
  });
  const auto drop = static_cast<std::size_t>(std::floor(warmup_fraction * sorted.size()));
  if (drop >= sorted.size()) throw DomainError("summarize: no records left after warmup");

  SimMetrics m;
  std::vector<double> T, sd;
  for (std::size_t i = drop; i < sorted.size(); ++i) {
    T.push_back(sorted[i].response_time());
    sd.push_back(sorted[i].slowdown);
  }
  m.jobs_measured = T.size();
  m.mean_T = mean_of(T);
  m.mean_slowdown = mean_of(sd);
  for (const double x : tail_grid()) {
    const auto above = std::count_if(sd.begin(), sd.end(), [x](double s) { return s > x; });
    m.tail.push_back({x, static_cast<double>(above) / static_cast<double>(sd.size())});
  }
  std::sort(T.begin(), T.end());
  std::sort(sd.begin(), sd.end());
  m.p50_T = percentile(T, 0.50);
  m.p90_T = percentile(T, 0.90);
  m.p99_T = percentile(T, 0.99);
  m.p50_slowdown = percentile(sd, 0.50);
  m.p90_slowdown = percentile(sd, 0.90);
  m.p99_slowdown = percentile(sd, 0.99);
  m.records = std::move(sorted);
  return m;
}

SimMetrics run_simulation(std::span<const JobSpec> workload, Scheduler& scheduler,
                          const WorkloadParams& params, const SimConfig& cfg) {
  params.validate();
  cfg.validate();
  for (std::size_t i = 1; i < workload.size(); ++i) {
    if (workload[i].arrival_time < workload[i - 1].arrival_time) {
      throw DomainError("run_simulation: arrivals must be non-decreasing");
    }
  }
  Engine engine(workload, scheduler, params, cfg);
  return engine.run();
}

SimMetrics run_simulation(std::span<const JobSpec> workload, const PolicyConfig& policy,
                          const WorkloadParams& params, const SimConfig& cfg) {
  validate_policy(policy);
  PolicyScheduler scheduler(policy);
  return run_simulation(workload, scheduler, params, cfg);
}

void write_job_records_csv(std::ostream& out, std::span<const JobRecord> records) {
  out << "job_id,arrival,dispatch,finish,k,n,b,relaunched,slowdown\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g,%d,%d,%.9g,%d,%.9g\n",
                  static_cast<long long>(r.spec.job_id), r.spec.arrival_time, r.dispatch_time,
                  r.finish_time, r.spec.k, r.n, r.spec.b, r.relaunch_count, r.slowdown);
    out << buf;
  }
}

}  // namespace slab
