#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "slab/stochastic.hpp"

namespace slab {

constexpr int kStateDim = 2;
constexpr int kNumActions = 4;

using State = std::array<double, kStateDim>;
using QValues = std::array<double, kNumActions>;

/// Fully connected Q-network: state -> hidden (ReLU) -> ... -> Q-values
/// (identity). Parameters live in one flat vector; layer l stores its weight
/// matrix row-major (out x in) followed by its bias.
class QNetwork {
 public:
  explicit QNetwork(std::vector<int> hidden = {64, 64});

  /// Uniform fan-in initialization, deterministic in `rng`.
  void init_random(RngStream& rng);

  QValues forward(const State& s) const;

  /// Mean Huber loss of Q(s_i)[a_i] against targets[i] and its gradient
  /// with respect to every parameter. Only the taken action contributes.
  double loss_and_gradient(std::span<const State> states, std::span<const int> actions,
                           std::span<const double> targets, double huber_delta,
                           std::vector<double>& grad) const;

  double loss(std::span<const State> states, std::span<const int> actions,
              std::span<const double> targets, double huber_delta) const;

  const std::vector<int>& shape() const { return dims_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  /// Offsets of layer `l`'s weights and bias in params().
  std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
  std::size_t bias_offset(std::size_t l) const {
    return offsets_[l] + static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
  }
  std::size_t num_layers() const { return dims_.size() - 1; }

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learn_rate, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(learn_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

double huber(double err, double delta);

/// JSON checkpoint: {"format": "...", "shape": [...], "params": [...]}.
void save_checkpoint(std::ostream& out, const QNetwork& net);
QNetwork load_checkpoint(std::istream& in);

}  // namespace slab
