#pragma once

// Double-double arithmetic built on error-free transformations.  Used where
// a power series sums terms many orders of magnitude larger than the result
// (1F1 at large imaginary argument), which plain or even compensated double
// summation cannot resolve because the terms themselves carry rounding error.

#include <cmath>
#include <complex>

namespace qcollapse::dd {

struct Real {
  double hi = 0.0;
  double lo = 0.0;

  constexpr Real() = default;
  constexpr Real(double v) : hi(v), lo(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Real(double h, double l) : hi(h), lo(l) {}

  double to_double() const { return hi + lo; }
};

inline Real two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline Real quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline Real two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline Real operator-(const Real& a) { return {-a.hi, -a.lo}; }

inline Real operator+(const Real& a, const Real& b) {
  Real s = two_sum(a.hi, b.hi);
  const Real t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline Real operator-(const Real& a, const Real& b) { return a + (-b); }

inline Real operator*(const Real& a, const Real& b) {
  Real p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline Real operator/(const Real& a, const Real& b) {
  const double q1 = a.hi / b.hi;
  Real r = a - Real(q1) * b;
  const double q2 = r.hi / b.hi;
  r = r - Real(q2) * b;
  const double q3 = r.hi / b.hi;
  return quick_two_sum(q1, q2) + Real(q3);
}

inline Real& operator+=(Real& a, const Real& b) { return a = a + b; }

struct Complex {
  Real re;
  Real im;

  constexpr Complex() = default;
  constexpr Complex(Real r, Real i) : re(r), im(i) {}
  Complex(std::complex<double> z) : re(z.real()), im(z.imag()) {}  // NOLINT

  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  double abs_approx() const { return std::hypot(re.hi, im.hi); }
};

inline Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
inline Complex operator/(const Complex& a, const Complex& b) {
  const Real den = b.re * b.re + b.im * b.im;
  const Real re = (a.re * b.re + a.im * b.im) / den;
  const Real im = (a.im * b.re - a.re * b.im) / den;
  return {re, im};
}
inline Complex& operator+=(Complex& a, const Complex& b) { return a = a + b; }

/// Exact z + k for an integer offset k.
inline Complex shift(std::complex<double> z, int k) {
  return {two_sum(z.real(), double(k)), Real(z.imag())};
}

}  // namespace qcollapse::dd
