#pragma once

// Complex Gamma, log-Gamma and the Kummer function 1F1(a; b; z) for complex
// parameters and argument.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "qcollapse/double_double.hpp"
#include "qcollapse/errors.hpp"

namespace qcollapse {

using complex_value = std::complex<double>;

struct EvalAccuracy {
  double rel_tol = 1e-13;
  int max_terms = 10000;
  double asymptotic_threshold = 40.0;

  void validate() const {
    if (!(rel_tol > 0.0)) throw InvalidInput("EvalAccuracy: rel_tol must be > 0");
    if (max_terms < 1) throw InvalidInput("EvalAccuracy: max_terms must be >= 1");
    if (!(asymptotic_threshold > 0.0))
      throw InvalidInput("EvalAccuracy: asymptotic_threshold must be > 0");
  }
};

/// 1F1 together with its first two z-derivatives.
struct KummerJet {
  complex_value value;
  complex_value d1;
  complex_value d2;
};

namespace detail {

inline bool is_nonpositive_integer(complex_value z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// sin(pi z) with the real part reduced exactly before multiplying by pi.
inline complex_value sin_pi(complex_value z) {
  const double x = z.real() - 2.0 * std::round(0.5 * z.real());
  const double y = std::numbers::pi * z.imag();
  const double px = std::numbers::pi * x;
  return {std::sin(px) * std::cosh(y), std::cos(px) * std::sinh(y)};
}

// Lanczos approximation, g = 7, nine terms.  Valid for Re z >= 0.5.
inline complex_value lanczos_log_gamma(complex_value z) {
  static constexpr double g = 7.0;
  static constexpr std::array<double, 9> coef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  const complex_value zm1 = z - 1.0;
  complex_value series = coef[0];
  for (std::size_t i = 1; i < coef.size(); ++i) series += coef[i] / (zm1 + double(i));
  const complex_value t = zm1 + g + 0.5;
  static const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  return half_log_two_pi + (zm1 + 0.5) * std::log(t) - t + std::log(series);
}

inline complex_value checked_exp(complex_value w, const char* what) {
  if (w.real() > std::log(std::numeric_limits<double>::max()))
    throw OverflowError(std::string(what) + ": result exceeds the representable range");
  return std::exp(w);
}

}  // namespace detail

/// Principal branch of log Gamma(z) for Re z > 0.
inline complex_value complex_log_gamma(complex_value z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("complex_log_gamma: non-finite argument");
  if (!(z.real() > 0.0)) throw DomainError("complex_log_gamma: requires Re z > 0");
  if (z.real() >= 0.5) return detail::lanczos_log_gamma(z);
  // Shift up by one: log Gamma(z) = log Gamma(z + 1) - log z, both principal.
  return detail::lanczos_log_gamma(z + 1.0) - std::log(z);
}

/// Gamma(z) on the whole plane except the poles 0, -1, -2, ...
inline complex_value complex_gamma(complex_value z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("complex_gamma: non-finite argument");
  if (detail::is_nonpositive_integer(z)) throw PoleError("complex_gamma: pole at non-positive integer");
  if (z.real() >= 0.5) return detail::checked_exp(detail::lanczos_log_gamma(z), "complex_gamma");
  // Reflection: Gamma(z) = pi / (sin(pi z) Gamma(1 - z)).
  const complex_value log_value = std::log(std::numbers::pi) - std::log(detail::sin_pi(z)) -
                                  detail::lanczos_log_gamma(1.0 - z);
  return detail::checked_exp(log_value, "complex_gamma");
}

/// 1 / Gamma(z), entire; exactly zero at the poles of Gamma.
inline complex_value reciprocal_gamma(complex_value z) {
  if (detail::is_nonpositive_integer(z)) return 0.0;
  if (z.real() >= 0.5) return std::exp(-detail::lanczos_log_gamma(z));
  return detail::sin_pi(z) * std::exp(detail::lanczos_log_gamma(1.0 - z)) / std::numbers::pi;
}

namespace detail {

struct SeriesSums {
  dd::Complex s0, s1, s2;  // sum t_k, sum k t_k, sum k(k-1) t_k
};

// Direct Kummer series in double-double.  order selects how many of the
// derivative sums are tracked (0, 1 or 2); each tracked sum has to satisfy
// the stopping rule.
inline SeriesSums kummer_series(complex_value a, complex_value b, complex_value z,
                                const EvalAccuracy& acc, int order) {
  SeriesSums s;
  s.s0 = dd::Complex(complex_value(1.0));
  dd::Complex term(complex_value(1.0));
  const dd::Complex zz(z);
  int quiet = 0;
  for (int k = 0; k < acc.max_terms; ++k) {
    const dd::Complex num = dd::shift(a, k) * zz;
    const dd::Complex den = dd::shift(b, k) * dd::Real(double(k + 1));
    const dd::Complex factor = num / den;
    term = term * factor;
    const double kk = double(k + 1);
    s.s0 += term;
    if (order >= 1) s.s1 += term * dd::Real(kk);
    if (order >= 2) s.s2 += term * dd::Real(kk * (kk - 1.0));

    const double mag = term.abs_approx();
    if (mag == 0.0) return s;  // terminating series
    bool small = mag <= acc.rel_tol * s.s0.abs_approx();
    if (order >= 1) small = small && mag * kk <= acc.rel_tol * s.s1.abs_approx();
    if (order >= 2) small = small && mag * kk * (kk - 1.0) <= acc.rel_tol * s.s2.abs_approx();
    // Only trust smallness once the terms have started to shrink.
    small = small && factor.abs_approx() < 1.0;
    quiet = small ? quiet + 1 : 0;
    if (quiet >= 3) return s;
  }
  throw ConvergenceError("kummer_1f1: series did not converge within max_terms");
}

// Large-|z| expansion (two exponential sectors).  With Olver's scaling
// M(a,b,z)/Gamma(b) the two contributions are
//   e^z z^(a-b) / Gamma(a)   * sum (1-a)_s (b-a)_s / s! z^-s
//   e^(+-i pi a) z^-a / Gamma(b-a) * sum (a)_s (a-b+1)_s / s! (-z)^-s
// with the upper sign for Im z >= 0.
inline complex_value kummer_asymptotic(complex_value a, complex_value b, complex_value z,
                                       const EvalAccuracy& acc) {
  auto divergent_sum = [&](complex_value p, complex_value q, complex_value w) {
    complex_value sum = 1.0;
    complex_value term = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int s = 0; s < acc.max_terms; ++s) {
      const complex_value next = term * (p + double(s)) * (q + double(s)) / (double(s + 1) * w);
      const double mag = std::abs(next);
      if (mag >= last) break;  // smallest term reached
      last = mag;
      term = next;
      sum += term;
      if (mag <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
  };
  const complex_value i_pi(0.0, std::numbers::pi);
  const complex_value log_z = std::log(z);
  const complex_value first = std::exp(z + (a - b) * log_z) * reciprocal_gamma(a) *
                              divergent_sum(1.0 - a, b - a, z);
  const double sign = z.imag() >= 0.0 ? 1.0 : -1.0;
  const complex_value second = std::exp(sign * i_pi * a - a * log_z) * reciprocal_gamma(b - a) *
                               divergent_sum(a, a - b + 1.0, -z);
  return complex_gamma(b) * (first + second);
}

inline void check_kummer_args(complex_value a, complex_value b, complex_value z,
                              const EvalAccuracy& acc) {
  acc.validate();
  for (complex_value v : {a, b, z})
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("kummer_1f1: non-finite argument");
  if (is_nonpositive_integer(b)) throw DomainError("kummer_1f1: b is a non-positive integer");
}

}  // namespace detail

/// Kummer's confluent hypergeometric function 1F1(a; b; z).
inline complex_value kummer_1f1(complex_value a, complex_value b, complex_value z,
                                const EvalAccuracy& acc = {}) {
  detail::check_kummer_args(a, b, z, acc);
  if (std::abs(z) > acc.asymptotic_threshold) return detail::kummer_asymptotic(a, b, z, acc);
  return detail::kummer_series(a, b, z, acc, 0).s0.to_complex();
}

/// d/dz 1F1(a; b; z) = (a/b) 1F1(a+1; b+1; z).
inline complex_value kummer_1f1_derivative(complex_value a, complex_value b, complex_value z,
                                           const EvalAccuracy& acc = {}) {
  detail::check_kummer_args(a, b, z, acc);
  return a / b * kummer_1f1(a + 1.0, b + 1.0, z, acc);
}

/// Value and first two derivatives.  Below the asymptotic threshold all three
/// come from one pass over the series, differentiated term by term.
inline KummerJet kummer_1f1_jet(complex_value a, complex_value b, complex_value z,
                                const EvalAccuracy& acc = {}) {
  detail::check_kummer_args(a, b, z, acc);
  if (detail::is_nonpositive_integer(b + 1.0)) throw DomainError("kummer_1f1_jet: b + 1 is a pole");
  if (std::abs(z) > acc.asymptotic_threshold) {
    return {detail::kummer_asymptotic(a, b, z, acc),
            a / b * detail::kummer_asymptotic(a + 1.0, b + 1.0, z, acc),
            a * (a + 1.0) / (b * (b + 1.0)) * detail::kummer_asymptotic(a + 2.0, b + 2.0, z, acc)};
  }
  if (z == complex_value(0.0)) return {1.0, a / b, a * (a + 1.0) / (b * (b + 1.0))};
  const detail::SeriesSums s = detail::kummer_series(a, b, z, acc, 2);
  const dd::Complex zz(z);
  const dd::Complex d1 = s.s1 / zz;
  const dd::Complex d2 = s.s2 / (zz * zz);
  return {s.s0.to_complex(), d1.to_complex(), d2.to_complex()};
}

}  // namespace qcollapse
