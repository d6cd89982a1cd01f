#include "slab/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "slab/errors.hpp"

namespace slab {

State encode_state(const ClusterView& view, const JobSpec& job) {
  State s{};
  auto assignment = place_tasks(view.nodes, job.k, job.r_cap);
  if (!assignment) {
    s[0] = 1.0;
  } else {
    double total = 0.0;
    for (int id : *assignment) total += view.nodes[static_cast<std::size_t>(id)].load();
    s[0] = total / static_cast<double>(assignment->size());
  }
  const double demand = job_demand(job);
  s[1] = std::clamp(std::log(demand / 10.0) / std::log(100.0), 0.0, 1.0);
  return s;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw DomainError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Experience& e) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(e);
}

std::vector<Experience> ReplayBuffer::sample(std::size_t n, RngStream& rng) const {
  n = std::min(n, items_.size());
  // Partial Fisher-Yates over the index set.
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<Experience> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back(items_[idx[i]]);
  }
  return out;
}

std::size_t VisitCounts::bin_index(const State& s) {
  auto bin = [](double x) {
    const int b = static_cast<int>(std::floor(x * kBins));
    return static_cast<std::size_t>(std::clamp(b, 0, kBins - 1));
  };
  return bin(s[0]) * kBins + bin(s[1]);
}

void VisitCounts::increment(const State& s, int action) {
  counts_[bin_index(s)][static_cast<std::size_t>(action)] += 1;
}

int ucb_action(const QValues& qvals, const VisitCounts::Row& counts) {
  for (int a = 0; a < kNumActions; ++a) {
    if (counts[static_cast<std::size_t>(a)] == 0) return a;
  }
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double log_total = std::log(total);
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < kNumActions; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double score = qvals[i] + std::sqrt(2.0 * log_total / static_cast<double>(counts[i]));
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

int greedy_action(const QValues& qvals) {
  return static_cast<int>(std::max_element(qvals.begin(), qvals.end()) - qvals.begin());
}

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("rl.gamma", "must be in [0, 1)");
  if (!(learn_rate > 0.0)) throw ConfigError("rl.learn_rate", "must be positive");
  if (episode_jobs < 1) throw ConfigError("rl.episode_jobs", "must be >= 1");
  if (batch_size < 1) throw ConfigError("rl.batch_size", "must be >= 1");
  if (train_repeats < 1) throw ConfigError("rl.train_repeats", "must be >= 1");
  if (target_sync_period < 1) throw ConfigError("rl.target_sync_period", "must be >= 1");
  if (total_episodes < 1) throw ConfigError("rl.total_episodes", "must be >= 1");
  if (!(huber_delta > 0.0)) throw ConfigError("rl.huber_delta", "must be positive");
  if (replay_capacity < 1) throw ConfigError("rl.replay_capacity", "must be >= 1");
  if (!(reward_clip > 0.0)) throw ConfigError("rl.reward_clip", "must be positive");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("rl.hidden", "layer sizes must be positive");
  }
}

double qnet_train_batch(QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                        const TrainerConfig& cfg, AdamOptimizer& opt) {
  if (batch.empty()) throw DomainError("qnet_train_batch: empty batch");
  std::vector<State> states;
  std::vector<int> actions;
  std::vector<double> targets;
  states.reserve(batch.size());
  for (const auto& e : batch) {
    const QValues next = target.forward(e.s_next);
    states.push_back(e.s);
    actions.push_back(e.a);
    targets.push_back(e.r + cfg.gamma * *std::max_element(next.begin(), next.end()));
  }
  std::vector<double> grad;
  const double loss = net.loss_and_gradient(states, actions, targets, cfg.huber_delta, grad);
  for (double g : grad) {
    if (!std::isfinite(g)) throw ConvergenceError("qnet_train_batch: non-finite gradient");
  }
  opt.step(net.params(), grad);
  return loss;
}

DqnLearner::DqnLearner(const TrainerConfig& cfg)
    : cfg_(cfg),
      rng_(cfg.seed),
      net_(cfg.hidden),
      target_(cfg.hidden),
      opt_(cfg.learn_rate),
      replay_(cfg.replay_capacity) {
  cfg_.validate();
  RngStream init = rng_.derive(0x1417);
  net_.init_random(init);
  target_ = net_;
}

int DqnLearner::explore(const State& s) {
  const int a = ucb_action(net_.forward(s), visits_.at(s));
  visits_.increment(s, a);
  return a;
}

double DqnLearner::end_episode() {
  ++episodes_;
  double total = 0.0;
  int steps = 0;
  if (replay_.size() > 0) {
    for (int i = 0; i < cfg_.train_repeats; ++i) {
      const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
      total += qnet_train_batch(net_, target_, batch, cfg_, opt_);
      ++steps;
    }
  }
  if (episodes_ % cfg_.target_sync_period == 0) target_ = net_;
  return steps > 0 ? total / steps : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace slab
