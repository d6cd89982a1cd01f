#pragma once

#include <string>
#include <vector>

#include "slab/qnetwork.hpp"
#include "slab/rl.hpp"
#include "slab/workload.hpp"

namespace slab {

struct EpisodeStats {
  int episode = 0;
  double mean_loss = 0.0;
  double mean_reward = 0.0;
};

struct TrainingResult {
  QNetwork net;
  std::vector<EpisodeStats> curve;
  bool unstable = false;
  std::string unstable_reason;
};

/// Trains a redundancy policy on the simulated cluster at offered load rho0.
/// Each episode is a run of episode_jobs consecutively dispatched jobs; its
/// transitions enter the replay buffer once all of them have finished.
TrainingResult run_training(const WorkloadParams& params, double rho0, const TrainerConfig& cfg,
                            std::size_t queue_limit = 1000);

void write_learning_curve_csv(std::ostream& out, const std::vector<EpisodeStats>& curve);

}  // namespace slab
