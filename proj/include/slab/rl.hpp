#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "slab/cluster.hpp"
#include "slab/qnetwork.hpp"
#include "slab/stochastic.hpp"
#include "slab/workload.hpp"

namespace slab {

/// (load of the nodes the job's base tasks would land on, normalized demand).
/// When the base tasks do not currently fit the load component is 1.
State encode_state(const ClusterView& view, const JobSpec& job);

struct Experience {
  State s{};
  int a = 0;
  double r = 0.0;
  State s_next{};
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(const Experience& e);
  /// Uniform sample of min(n, size()) distinct entries.
  std::vector<Experience> sample(std::size_t n, RngStream& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Experience>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Experience> items_;
};

class VisitCounts {
 public:
  static constexpr int kBins = 10;
  using Row = std::array<std::uint64_t, kNumActions>;

  static std::size_t bin_index(const State& s);

  const Row& at(const State& s) const { return counts_[bin_index(s)]; }
  void increment(const State& s, int action);

 private:
  std::array<Row, kBins * kBins> counts_{};
};

/// argmax_a Q(s,a) + sqrt(2 ln(sum N) / N(s,a)); unvisited actions first.
int ucb_action(const QValues& qvals, const VisitCounts::Row& counts);

int greedy_action(const QValues& qvals);

struct TrainerConfig {
  double gamma = 0.9;
  double learn_rate = 1e-3;
  int episode_jobs = 128;
  int batch_size = 64;
  int train_repeats = 4;
  int target_sync_period = 10;
  int total_episodes = 200;
  std::uint64_t seed = 1;
  double huber_delta = 1.0;
  std::size_t replay_capacity = 10000;
  double reward_clip = 100.0;
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

/// One gradient step on the batch against targets read from `target`.
/// Returns the loss before the step.
double qnet_train_batch(QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                        const TrainerConfig& cfg, AdamOptimizer& opt);

/// Q-learning agent without any knowledge of the environment: the caller
/// reports states, rewards and episode boundaries.
class DqnLearner {
 public:
  explicit DqnLearner(const TrainerConfig& cfg);

  /// UCB action for `s`; also counts the visit.
  int explore(const State& s);
  /// Counts a visit for an action chosen earlier by ucb_action.
  void explore_commit(const State& s, int a) { visits_.increment(s, a); }
  void push(const Experience& e) { replay_.push(e); }

  /// train_repeats batches, then a target sync if one is due.
  /// Returns the mean pre-step loss (NaN when the buffer is empty).
  double end_episode();

  const QNetwork& network() const { return net_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  const VisitCounts& visits() const { return visits_; }
  int episodes() const { return episodes_; }

 private:
  TrainerConfig cfg_;
  RngStream rng_;
  QNetwork net_, target_;
  AdamOptimizer opt_;
  ReplayBuffer replay_;
  VisitCounts visits_;
  int episodes_ = 0;
};

}  // namespace slab
