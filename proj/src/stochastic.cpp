#include "slab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slab/errors.hpp"
#include "slab/specfn.hpp"

namespace slab {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return engine_();
}

double RngStream::uniform_pos() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::exponential(double rate) { return -std::log(uniform_pos()) / rate; }

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("RngStream::below: bound must be positive");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % bound;
  }
}

RngStream RngStream::derive(std::uint64_t stream_id) const {
  return RngStream(mix_seed(seed_ ^ mix_seed(stream_id)));
}

ParetoDist::ParetoDist(double minimum_, double tail_index_)
    : minimum(minimum_), tail_index(tail_index_) {
  if (!(minimum > 0.0) || !(tail_index > 0.0)) {
    throw DomainError("ParetoDist: minimum and tail_index must be > 0");
  }
}

TruncatedParetoDist::TruncatedParetoDist(double minimum_, double maximum_, double tail_index_)
    : minimum(minimum_), maximum(maximum_), tail_index(tail_index_) {
  if (!(minimum > 0.0) || !(tail_index > 0.0)) {
    throw DomainError("TruncatedParetoDist: minimum and tail_index must be > 0");
  }
  if (!(maximum > minimum)) throw DomainError("TruncatedParetoDist: maximum must exceed minimum");
}

ZipfDist::ZipfDist(int k_max) : k_max_(k_max), harmonic_(0.0) {
  if (k_max < 1) throw DomainError("ZipfDist: k_max must be >= 1");
  for (int i = 1; i <= k_max; ++i) harmonic_ += 1.0 / i;
  cdf_.reserve(static_cast<std::size_t>(k_max));
  double acc = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    acc += (1.0 / k) / harmonic_;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

double ZipfDist::pmf(int k) const {
  if (k < 1 || k > k_max_) return 0.0;
  return (1.0 / k) / harmonic_;
}

double pareto_tail_prob(const ParetoDist& dist, double x) {
  if (x <= dist.minimum) return 1.0;
  return std::pow(dist.minimum / x, dist.tail_index);
}

double pareto_cdf(const ParetoDist& dist, double x) { return 1.0 - pareto_tail_prob(dist, x); }

double pareto_moment(const ParetoDist& dist, double m) {
  if (!(dist.tail_index > m)) {
    throw InfiniteMomentError("pareto_moment: E[X^" + std::to_string(m) +
                              "] is infinite for tail index " +
                              std::to_string(dist.tail_index));
  }
  return dist.tail_index * std::pow(dist.minimum, m) / (dist.tail_index - m);
}

double pareto_partial_moment_below(const ParetoDist& dist, double x, double m) {
  if (x <= dist.minimum) return 0.0;
  const double a = dist.tail_index;
  const double scale = a * std::pow(dist.minimum, m);
  const double log_ratio = std::log(x / dist.minimum);
  const double diff = a - m;
  if (diff == 0.0) return scale * log_ratio;
  // (1 - (min/x)^(a-m)) / (a-m), stable as a -> m.
  return scale * (-std::expm1(-diff * log_ratio)) / diff;
}

double pareto_cond_moment(const ParetoDist& dist, double x, int m, Side side) {
  if (m != 1 && m != 2) throw DomainError("pareto_cond_moment: m must be 1 or 2");
  if (side == Side::above) {
    if (!(dist.tail_index > m)) {
      throw InfiniteMomentError("pareto_cond_moment: conditional moment above x is infinite");
    }
    const double base = std::max(x, dist.minimum);
    return dist.tail_index * std::pow(base, m) / (dist.tail_index - m);
  }
  if (x <= dist.minimum) {
    throw NullEventError("pareto_cond_moment: Pr{X <= x} = 0 for x <= minimum");
  }
  return pareto_partial_moment_below(dist, x, m) / pareto_cdf(dist, x);
}

double truncated_cdf(const TruncatedParetoDist& dist, double x) {
  if (x >= dist.maximum) return 1.0;
  const ParetoDist base = dist.untruncated();
  return pareto_cdf(base, x) / pareto_cdf(base, dist.maximum);
}

double truncated_moment(const TruncatedParetoDist& dist, double m) {
  return truncated_partial_moment_below(dist, dist.maximum, m);
}

double truncated_partial_moment_below(const TruncatedParetoDist& dist, double x, double m) {
  const ParetoDist base = dist.untruncated();
  return pareto_partial_moment_below(base, std::min(x, dist.maximum), m) /
         pareto_cdf(base, dist.maximum);
}

double service_moment(const ServiceDist& dist, double m) {
  return std::visit(
      [m](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ParetoDist>) {
          return pareto_moment(d, m);
        } else {
          return truncated_moment(d, m);
        }
      },
      dist);
}

double service_partial_moment_below(const ServiceDist& dist, double x, double m) {
  return std::visit(
      [x, m](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ParetoDist>) {
          return pareto_partial_moment_below(d, x, m);
        } else {
          return truncated_partial_moment_below(d, x, m);
        }
      },
      dist);
}

double service_cdf(const ServiceDist& dist, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ParetoDist>) {
          return pareto_cdf(d, x);
        } else {
          return truncated_cdf(d, x);
        }
      },
      dist);
}

double service_minimum(const ServiceDist& dist) {
  return std::visit([](const auto& d) { return d.minimum; }, dist);
}

double sample(const ParetoDist& dist, RngStream& rng) {
  return dist.minimum * std::pow(rng.uniform_pos(), -1.0 / dist.tail_index);
}

double sample(const TruncatedParetoDist& dist, RngStream& rng) {
  const double mass = -std::expm1(dist.tail_index * std::log(dist.minimum / dist.maximum));
  const double v = rng.uniform();
  return dist.minimum * std::pow(1.0 - v * mass, -1.0 / dist.tail_index);
}

int sample(const ZipfDist& dist, RngStream& rng) {
  const double u = rng.uniform();
  const auto& cdf = dist.cdf();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), dist.k_max() - 1)) + 1;
}

double sample(const ServiceDist& dist, RngStream& rng) {
  return std::visit([&rng](const auto& d) { return sample(d, rng); }, dist);
}

double zipf_mean(const ZipfDist& dist) {
  double h = 0.0;
  for (int i = 1; i <= dist.k_max(); ++i) h += 1.0 / i;
  return dist.k_max() / h;
}

double zipf_second_moment(const ZipfDist& dist) {
  double acc = 0.0;
  for (int k = 1; k <= dist.k_max(); ++k) acc += static_cast<double>(k) * k * dist.pmf(k);
  return acc;
}

double orderstat_moment(int n, int k, double alpha, int m) {
  if (n < 1 || k < 1 || k > n) throw DomainError("orderstat_moment: need 1 <= k <= n");
  if (!(alpha > 0.0)) throw DomainError("orderstat_moment: alpha must be > 0");
  if (m != 1 && m != 2) throw DomainError("orderstat_moment: m must be 1 or 2");
  const double span = n - k + 1;
  if (!(alpha * span > m)) {
    throw InfiniteMomentError("orderstat_moment: E[S_{" + std::to_string(n) + ":" +
                              std::to_string(k) + "}^" + std::to_string(m) +
                              "] is infinite for alpha=" + std::to_string(alpha));
  }
  const double shift = m / alpha;
  using specfn::ln_gamma;
  const double log_value =
      ln_gamma(n + 1.0) - ln_gamma(span) + ln_gamma(span - shift) - ln_gamma(n + 1.0 - shift);
  return std::exp(log_value);
}

double orderstat_approx(int n, int k, double alpha) {
  if (!(n > k) || k < 1) throw DomainError("orderstat_approx: need n > k >= 1");
  if (!(alpha > 0.0)) throw DomainError("orderstat_approx: alpha must be > 0");
  return std::pow(1.0 - static_cast<double>(k) / n, -1.0 / alpha);
}

double coded_cost_mean(int n, int k, double alpha) {
  if (!(alpha > 1.0)) throw InfiniteMomentError("coded_cost_mean: alpha must be > 1");
  if (n < 1 || k < 1 || k > n) throw DomainError("coded_cost_mean: need 1 <= k <= n");
  if (n == k) return k * alpha / (alpha - 1.0);
  const double latency = orderstat_moment(n, k, alpha, 1);
  return n / (alpha - 1.0) * (alpha - (1.0 - static_cast<double>(k) / n) * latency);
}

double cost_expansion_factor(double alpha, double r) {
  if (!(alpha > 1.0) || !(r > 1.0)) throw DomainError("cost_expansion_factor: need alpha > 1, r > 1");
  return r / (alpha - 1.0) * (alpha - std::pow(1.0 - 1.0 / r, 1.0 - 1.0 / alpha));
}

double cost_reduction_threshold(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("cost_reduction_threshold: alpha must be > 1");
  return 1.0 / (-std::expm1(-alpha * std::log(alpha)));
}

}  // namespace slab
