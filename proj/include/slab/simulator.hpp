#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slab/cluster.hpp"
#include "slab/policies.hpp"
#include "slab/workload.hpp"

namespace slab {

enum class TaskStatus { running, completed, cancelled, relaunched };

struct TaskRecord {
  std::int64_t task_id = 0;
  std::int64_t job_id = 0;
  int node_id = 0;
  double start_time = 0.0;
  double straggle_factor = 1.0;
  double completion_time = 0.0;  ///< scheduled, or actual stop time once no longer running
  TaskStatus status = TaskStatus::running;
  bool is_relaunch = false;
};

struct JobRecord {
  JobSpec spec;
  int n = 0;
  double dispatch_time = 0.0;
  double finish_time = 0.0;
  int relaunch_count = 0;
  double slowdown = 0.0;
  double cost = 0.0;  ///< resource-time held by all of the job's tasks

  double response_time() const { return finish_time - spec.arrival_time; }
};

enum class EventType { job_arrival, task_complete, relaunch_timer };

struct EventLogEntry {
  double time = 0.0;
  EventType type = EventType::job_arrival;
  std::int64_t id = 0;

  friend bool operator==(const EventLogEntry&, const EventLogEntry&) = default;
};

/// Replaces sampled straggle factors by a fixed script, cycled.
struct StraggleOverride {
  std::vector<double> factors;
};

struct SimConfig {
  std::int64_t num_jobs = 0;  ///< jobs (from the start of the workload) that must finish; 0 = all
  double warmup_fraction = 0.0;
  std::size_t queue_limit = 1000;
  int checkpoint_count = 10;
  std::uint64_t seed = 1;
  std::optional<StraggleOverride> straggle_override;
  bool check_invariants = false;
  bool record_events = false;
  bool keep_tasks = false;

  void validate() const;
};

struct TailPoint {
  double x = 0.0;
  double prob = 0.0;  ///< fraction of jobs with slowdown > x
};

struct SimMetrics {
  std::vector<JobRecord> records;  ///< finished counted jobs, by job id
  std::size_t jobs_measured = 0;   ///< records left after the warmup drop
  double mean_T = 0.0, p50_T = 0.0, p90_T = 0.0, p99_T = 0.0;
  double mean_slowdown = 0.0, p50_slowdown = 0.0, p90_slowdown = 0.0, p99_slowdown = 0.0;
  std::vector<TailPoint> tail;
  double utilization = 0.0;
  bool unstable = false;
  std::string unstable_reason;
  std::uint64_t events_processed = 0;
  std::vector<EventLogEntry> events;
  std::vector<TaskRecord> tasks;
};

const std::vector<double>& tail_grid();

/// Aggregates over `records` after dropping the first warmup_fraction (by job id).
SimMetrics summarize(std::span<const JobRecord> records, double warmup_fraction);

/// Decision hook driven by the event loop. decide() may be called several
/// times for a blocked queue head; on_dispatch() fires once, with the view
/// that the accepted decision was based on.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual RedundancyDecision decide(const JobSpec& job, const ClusterView& view) = 0;
  virtual void on_dispatch(const JobSpec&, const RedundancyDecision&, const ClusterView&) {}
  virtual void on_job_finished(const JobRecord&) {}
  /// Ends the run early once true.
  virtual bool done() const { return false; }
};

class PolicyScheduler : public Scheduler {
 public:
  explicit PolicyScheduler(PolicyConfig policy) : policy_(std::move(policy)) {}
  RedundancyDecision decide(const JobSpec& job, const ClusterView& view) override {
    return decide_redundancy(policy_, job, view);
  }

 private:
  PolicyConfig policy_;
};

SimMetrics run_simulation(std::span<const JobSpec> workload, Scheduler& scheduler,
                          const WorkloadParams& params, const SimConfig& cfg);

SimMetrics run_simulation(std::span<const JobSpec> workload, const PolicyConfig& policy,
                          const WorkloadParams& params, const SimConfig& cfg);

/// CSV with header job_id,arrival,dispatch,finish,k,n,b,relaunched,slowdown.
void write_job_records_csv(std::ostream& out, std::span<const JobRecord> records);

}  // namespace slab
