#pragma once

// Special functions used by the order-statistic, relaunch and Erlang-C
// formulas. All functions are pure and reentrant.

namespace slab::specfn {

struct SpecFnTolerance {
  double rel_tol = 1e-10;
  int max_iter = 500;

  void validate() const;
};

/// ln Γ(x) for x > 0.
double ln_gamma(double x);

/// ln Γ(a, x), the log of the (non-regularized) upper incomplete Gamma
/// function. Safe for large a where Γ(a, x) itself overflows.
double log_upper_inc_gamma(double a, double x, const SpecFnTolerance& tol = {});

/// Γ(a, x) = ∫_x^∞ u^{a-1} e^{-u} du.
double upper_inc_gamma(double a, double x, const SpecFnTolerance& tol = {});

/// Regularized incomplete Beta I(q; m, n) = B(q; m, n) / B(m, n).
double reg_inc_beta(double q, double m, double n, const SpecFnTolerance& tol = {});

/// ln [Γ(a) / Γ(b)] evaluated without forming either Gamma value.
inline double ln_gamma_ratio(double a, double b) { return ln_gamma(a) - ln_gamma(b); }

}  // namespace slab::specfn
