#pragma once

// Distributions of the cluster model (Pareto service times and slowdown
// factors, Zipf task counts), their moments, and the Pareto order-statistic
// formulas that drive the analysis of coded execution.

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace slab {

/// Reproducible random stream. Identical seeds yield bit-identical sequences
/// on every platform: the engine output is fixed by the standard and all
/// conversions to reals are done here rather than by <random> distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on (0, 1].
  double uniform_pos();
  /// Uniform on [0, 1).
  double uniform();
  double exponential(double rate);
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// A statistically independent stream keyed by (seed, stream_id).
  RngStream derive(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
};

/// Mixes a 64-bit value (splitmix64 finalizer); used to derive seeds.
std::uint64_t mix_seed(std::uint64_t x);

struct ParetoDist {
  double minimum;
  double tail_index;

  ParetoDist(double minimum, double tail_index);
};

/// Pareto conditioned on X <= maximum.
struct TruncatedParetoDist {
  double minimum;
  double maximum;
  double tail_index;

  TruncatedParetoDist(double minimum, double maximum, double tail_index);
  ParetoDist untruncated() const { return ParetoDist(minimum, tail_index); }
};

/// Zipf with exponent 1 on {1, ..., k_max}. Holds the CDF table used for sampling.
class ZipfDist {
 public:
  explicit ZipfDist(int k_max);

  int k_max() const { return k_max_; }
  double pmf(int k) const;
  const std::vector<double>& cdf() const { return cdf_; }

 private:
  int k_max_;
  double harmonic_;
  std::vector<double> cdf_;
};

/// Task service-time law: plain or upper-truncated Pareto.
using ServiceDist = std::variant<ParetoDist, TruncatedParetoDist>;

enum class Side { below, above };

double pareto_tail_prob(const ParetoDist& dist, double x);
double pareto_cdf(const ParetoDist& dist, double x);

/// E[X^m]; requires tail_index > m. `m` may be any positive real.
double pareto_moment(const ParetoDist& dist, double m);

/// E[X^m 1{X <= x}]. Finite for every tail index.
double pareto_partial_moment_below(const ParetoDist& dist, double x, double m);

/// E[X^m | X <= x] or E[X^m | X > x].
double pareto_cond_moment(const ParetoDist& dist, double x, int m, Side side);

double truncated_cdf(const TruncatedParetoDist& dist, double x);
double truncated_moment(const TruncatedParetoDist& dist, double m);
double truncated_partial_moment_below(const TruncatedParetoDist& dist, double x, double m);

/// Moments of a ServiceDist (dispatching on the alternative).
double service_moment(const ServiceDist& dist, double m);
double service_partial_moment_below(const ServiceDist& dist, double x, double m);
double service_cdf(const ServiceDist& dist, double x);
double service_minimum(const ServiceDist& dist);

double sample(const ParetoDist& dist, RngStream& rng);
double sample(const TruncatedParetoDist& dist, RngStream& rng);
int sample(const ZipfDist& dist, RngStream& rng);
double sample(const ServiceDist& dist, RngStream& rng);

double zipf_mean(const ZipfDist& dist);
double zipf_second_moment(const ZipfDist& dist);

/// E[S_{n:k}^m] for S ~ Pareto(1, alpha): the k-th smallest of n samples.
double orderstat_moment(int n, int k, double alpha, int m);

/// (1 - k/n)^{-1/alpha}, the closed-form approximation of E[S_{n:k}] for n > k.
double orderstat_approx(int n, int k, double alpha);

/// E[C_{n,k}] with C_{n,k} = sum_{i<=k} S_{n:i} + (n-k) S_{n:k}: the total
/// normalized busy time of a k-of-n coded job with cancel-on-completion.
double coded_cost_mean(int n, int k, double alpha);

/// f(alpha, r): per-task cost of expanding a job at rate r (n ≈ r k).
double cost_expansion_factor(double alpha, double r);

/// Largest expansion rate that still lowers the mean cost: (1 - alpha^-alpha)^-1.
double cost_reduction_threshold(double alpha);

}  // namespace slab
