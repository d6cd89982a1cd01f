#include "slab/training.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "slab/errors.hpp"
#include "slab/simulator.hpp"

namespace slab {

namespace {

class TrainingScheduler : public Scheduler {
 public:
  TrainingScheduler(const TrainerConfig& cfg) : cfg_(cfg), learner_(cfg) {}

  RedundancyDecision decide(const JobSpec& job, const ClusterView& view) override {
    pending_state_ = encode_state(view, job);
    pending_action_ =
        ucb_action(learner_.network().forward(pending_state_), learner_.visits().at(pending_state_));
    return {job.k + pending_action_, std::nullopt};
  }

  void on_dispatch(const JobSpec& job, const RedundancyDecision&, const ClusterView&) override {
    learner_.explore_commit(pending_state_, pending_action_);
    Step st;
    st.job_id = job.job_id;
    st.s = pending_state_;
    st.a = pending_action_;
    steps_.push_back(st);
    flush();
  }

  void on_job_finished(const JobRecord& rec) override {
    for (auto& st : steps_) {
      if (st.job_id == rec.spec.job_id) {
        st.r = -std::min(rec.slowdown, cfg_.reward_clip);
        st.has_reward = true;
        break;
      }
    }
    flush();
  }

  bool done() const override { return static_cast<int>(curve_.size()) >= cfg_.total_episodes; }

  const std::vector<EpisodeStats>& curve() const { return curve_; }
  const DqnLearner& learner() const { return learner_; }

 private:
  struct Step {
    std::int64_t job_id = 0;
    State s{};
    int a = 0;
    double r = 0.0;
    bool has_reward = false;
  };

  // Closes every episode whose jobs have all finished and whose successor
  // state is known.
  void flush() {
    const auto m = static_cast<std::size_t>(cfg_.episode_jobs);
    while (!done() && steps_.size() > m) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!steps_[i].has_reward) return;
      }
      double reward_sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        learner_.push(Experience{steps_[i].s, steps_[i].a, steps_[i].r, steps_[i + 1].s});
        reward_sum += steps_[i].r;
      }
      steps_.erase(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(m));
      EpisodeStats es;
      es.episode = static_cast<int>(curve_.size());
      es.mean_loss = learner_.end_episode();
      es.mean_reward = reward_sum / static_cast<double>(m);
      curve_.push_back(es);
    }
  }

  TrainerConfig cfg_;
  DqnLearner learner_;
  std::deque<Step> steps_;
  std::vector<EpisodeStats> curve_;
  State pending_state_{};
  int pending_action_ = 0;
};

}  // namespace

TrainingResult run_training(const WorkloadParams& base, double rho0, const TrainerConfig& cfg,
                            std::size_t queue_limit) {
  cfg.validate();
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw ConfigError("rho0", "must be in (0, 1)");
  WorkloadParams params = base;
  params.lambda = lambda_for_offered_load(rho0, params);
  params.validate();

  // Jobs still in flight when the last episode closes need successors too.
  const auto needed = static_cast<std::int64_t>(cfg.total_episodes) * cfg.episode_jobs;
  RngStream wl_rng = RngStream(cfg.seed).derive(1);
  const auto workload = generate_workload(params, needed + needed / 5 + 2000, wl_rng);

  SimConfig sim;
  sim.seed = mix_seed(cfg.seed);
  sim.queue_limit = queue_limit;

  TrainingScheduler sched(cfg);
  const SimMetrics m = run_simulation(workload, sched, params, sim);

  TrainingResult res{sched.learner().network(), sched.curve(), m.unstable, m.unstable_reason};
  if (!res.unstable && static_cast<int>(res.curve.size()) < cfg.total_episodes) {
    res.unstable = true;
    res.unstable_reason = "workload exhausted before training finished";
  }
  return res;
}

void write_learning_curve_csv(std::ostream& out, const std::vector<EpisodeStats>& curve) {
  out << "episode,mean_loss,mean_reward\n";
  char buf[128];
  for (const auto& e : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", e.episode, e.mean_loss, e.mean_reward);
    out << buf;
  }
}

}  // namespace slab
