#pragma once

// Verification suites: closed-form residuals, asymptotics and randomized
// special-function identities.  Each suite reports its worst deviation
// against a fixed tolerance.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qcollapse/params.hpp"
#include "qcollapse/profile.hpp"
#include "qcollapse/specfun.hpp"

namespace qcollapse {

struct CheckResult {
  std::string name;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // NaN for parameter-free suites
  double worst = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;

  bool passed() const { return std::isfinite(worst) && worst <= tolerance; }
};

inline CheckResult check_ode_residual(const SelfSimilarProfile& p, double lo = 0.05, double hi = 20.0, int n = 200) {
  CheckResult r{"ode_residual", p.params().gamma, 0.0, 1e-9, 0};
  for (double xi : log_grid(lo, hi, n)) {
    r.worst = std::max(r.worst, p.ode_residual(xi));
    ++r.samples;
  }
  return r;
}

/// Relative spread of |R xi^3| over [lo, hi] (max - min over mean).
inline CheckResult check_tail_envelope(const SelfSimilarProfile& p, double lo = 20.0, double hi = 30.0, int n = 201) {
  CheckResult r{"tail_envelope", p.params().gamma, 0.0, 1e-2, 0};
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0, sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double xi = lo + (hi - lo) * k / (n - 1);
    const double v = std::abs(p(xi)) * xi * xi * xi;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    sum += v;
    ++r.samples;
  }
  r.worst = (mx - mn) / (sum / n);
  return r;
}

inline CheckResult check_small_xi(const SelfSimilarProfile& p, double xi = 0.01) {
  CheckResult r{"small_xi_asymptote", p.params().gamma, 0.0, 1e-3, 1};
  const complex_value exact = p(xi);
  r.worst = std::abs(exact - p.small_xi_asymptote(xi)) / std::abs(exact);
  return r;
}

/// Series and tail evaluations on both sides of the switch point.
inline CheckResult check_switch_continuity(const SelfSimilarProfile& p) {
  CheckResult r{"switch_continuity", p.params().gamma, 0.0, 1e-7, 0};
  const double sw = std::sqrt(SelfSimilarProfile::switch_xi2);
  for (double d : {-0.2, -0.05, 0.0, 0.05, 0.2}) {
    const double xi = sw + d;
    const complex_value a = p.series_jet(xi).R, b = p.tail_jet(xi).R;
    r.worst = std::max(r.worst, std::abs(a - b) / std::abs(a));
    ++r.samples;
  }
  return r;
}

namespace detail {

inline complex_value random_complex(std::mt19937_64& rng, double re_lo, double re_hi, double im_lo, double im_hi) {
  std::uniform_real_distribution<double> re(re_lo, re_hi), im(im_lo, im_hi);
  const double x = re(rng);
  return {x, im(rng)};
}

inline complex_value random_in_disc(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = radius * std::sqrt(u(rng));
  return std::polar(rad, 2.0 * std::numbers::pi * u(rng));
}

// Distance to the nearest non-positive integer.
inline double pole_distance(complex_value z) {
  return std::abs(z - std::min(0.0, std::round(z.real())));
}

}  // namespace detail

/// |Gamma(z+1) - z Gamma(z)| / |Gamma(z+1)| for 0.5 <= Re z <= 10, |Im z| <= 10.
inline CheckResult check_gamma_recurrence(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  CheckResult r{"gamma_recurrence", std::numeric_limits<double>::quiet_NaN(), 0.0, 1e-12, 0};
  for (int k = 0; k < draws; ++k) {
    const complex_value z = detail::random_complex(rng, 0.5, 10.0, -10.0, 10.0);
    const complex_value g1 = complex_gamma(z + 1.0);
    r.worst = std::max(r.worst, std::abs(g1 - z * complex_gamma(z)) / std::abs(g1));
    ++r.samples;
  }
  return r;
}

/// Gamma(z) Gamma(1-z) sin(pi z) / pi = 1 for |Re z| < 1, |Im z| <= 3.
inline CheckResult check_gamma_reflection(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  CheckResult r{"gamma_reflection", std::numeric_limits<double>::quiet_NaN(), 0.0, 1e-10, 0};
  for (int k = 0; k < draws; ++k) {
    const complex_value z = detail::random_complex(rng, -1.0, 1.0, -3.0, 3.0);
    if (std::abs(z) < 1e-3) continue;
    const complex_value v = complex_gamma(z) * complex_gamma(1.0 - z) * detail::sin_pi(z) / std::numbers::pi;
    r.worst = std::max(r.worst, std::abs(v - 1.0));
    ++r.samples;
  }
  return r;
}

/// 1F1(a;b;z) = e^z 1F1(b-a;b;-z) for |a|, |b| <= 3, |z| <= 20, b at least
/// 0.1 from the poles.  Measured relative to the larger side.
inline CheckResult check_kummer_transformation(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  CheckResult r{"kummer_transformation", std::numeric_limits<double>::quiet_NaN(), 0.0, 1e-10, 0};
  while (int(r.samples) < draws) {
    const complex_value a = detail::random_in_disc(rng, 3.0);
    const complex_value b = detail::random_in_disc(rng, 3.0);
    const complex_value z = detail::random_in_disc(rng, 20.0);
    if (detail::pole_distance(b) < 0.1) continue;
    const complex_value lhs = kummer_1f1(a, b, z);
    const complex_value rhs = std::exp(z) * kummer_1f1(b - a, b, -z);
    r.worst = std::max(r.worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
    ++r.samples;
  }
  return r;
}

/// Analytic derivative against a central difference with step 1e-5, for
/// |a|, |b| <= 3 and |z| <= 3.  Error scaled by max(1, |M'|).
inline CheckResult check_kummer_derivative(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  CheckResult r{"kummer_derivative_fd", std::numeric_limits<double>::quiet_NaN(), 0.0, 1e-8, 0};
  const double h = 1e-5;
  while (int(r.samples) < draws) {
    const complex_value a = detail::random_in_disc(rng, 3.0);
    const complex_value b = detail::random_in_disc(rng, 3.0);
    const complex_value z = detail::random_in_disc(rng, 3.0);
    if (detail::pole_distance(b) < 0.1) continue;
    const complex_value d = kummer_1f1_derivative(a, b, z);
    const complex_value fd = (kummer_1f1(a, b, z + h) - kummer_1f1(a, b, z - h)) / (2.0 * h);
    r.worst = std::max(r.worst, std::abs(d - fd) / std::max(1.0, std::abs(d)));
    ++r.samples;
  }
  return r;
}

inline std::vector<CheckResult> identity_suite(std::uint64_t seed = 20240917, int draws = 1000) {
  return {check_gamma_recurrence(seed, draws), check_gamma_reflection(seed + 1, draws),
          check_kummer_transformation(seed + 2, draws), check_kummer_derivative(seed + 3, draws)};
}

inline std::vector<CheckResult> profile_suite(const CollapseParams& params) {
  const SelfSimilarProfile p(params);
  return {check_ode_residual(p), check_tail_envelope(p), check_small_xi(p), check_switch_continuity(p)};
}

}  // namespace qcollapse
