#pragma once

// Reference implementations used only by the tests.  None of them shares code
// with the library: extended-precision series, Stirling's series, a
// Dormand-Prince integration of the radial ODE, and the free-particle
// Gaussian solved by the method of images.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace oracle {

using cld = std::complex<long double>;
using cd = std::complex<double>;

// log Gamma by Stirling's series after shifting Re z above 20.
inline cld log_gamma(cld z) {
  static const long double bernoulli_terms[] = {
      1.0L / 12, -1.0L / 360, 1.0L / 1260, -1.0L / 1680, 1.0L / 1188, -691.0L / 360360, 1.0L / 156,
      -3617.0L / 122400};
  cld shift = 0;
  while (z.real() < 20.0L) {
    shift += std::log(z);
    z += 1.0L;
  }
  const long double half_log_2pi = 0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
  cld s = (z - 0.5L) * std::log(z) - z + half_log_2pi;
  cld zp = z;
  const cld z2 = z * z;
  for (long double b : bernoulli_terms) {
    s += b / zp;
    zp *= z2;
  }
  return s - shift;
}

inline cld gamma(cld z) {
  if (z.real() < 0.5L) {
    const long double pi = std::numbers::pi_v<long double>;
    return pi / (std::sin(pi * z) * std::exp(log_gamma(1.0L - z)));
  }
  return std::exp(log_gamma(z));
}

// Direct Kummer series in long double.
inline cld kummer(cld a, cld b, cld z) {
  cld sum = 1, term = 1;
  for (int k = 0; k < 100000; ++k) {
    term *= (a + (long double)k) * z / ((b + (long double)k) * (long double)(k + 1));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum) && k > 5) break;
  }
  return sum;
}

inline double alpha_of(double gamma) { return std::sqrt(4.0 * gamma - 1.0); }

// Prefactors A and B of the closed form, from the long-double Gamma.
inline std::pair<cld, cld> coefficients(double gamma_) {
  const long double a = std::sqrt(4.0L * gamma_ - 1.0L);
  const cld ia(0, a);
  const long double pi = std::numbers::pi_v<long double>;
  const cld A = std::exp(ia / 2.0L * std::log(2.0L)) * gamma(1.0L + ia / 2.0L) * gamma((5.0L - ia) / 4.0L);
  const cld B = std::exp(-pi * a / 4.0L) * gamma(1.0L - ia / 2.0L) * gamma((5.0L + ia) / 4.0L);
  return {A, B};
}

// Closed form assembled from the oracle series; valid for moderate xi.
inline cd profile(double gamma_, double xi) {
  const auto [A, B] = coefficients(gamma_);
  const long double a = std::sqrt(4.0L * gamma_ - 1.0L);
  const cld ia(0, a);
  const cld z(0, -0.5L * xi * xi);
  const long double lx = std::log((long double)xi);
  const cld t1 = A * std::exp((-0.5L - ia / 2.0L) * lx) * kummer(-(1.0L + ia) / 4.0L, (2.0L - ia) / 2.0L, z);
  const cld t2 = B * std::exp((-0.5L + ia / 2.0L) * lx) * kummer(-(1.0L - ia) / 4.0L, (2.0L + ia) / 2.0L, z);
  return cd(t1 - t2);
}

// Limit of R xi^3 e^{+i xi^2/2} as xi -> infinity, from the leading
// large-argument behaviour of each Kummer function:
//   1F1(a;b;z) ~ Gamma(b)/Gamma(a) e^z z^(a-b)   with z = -i xi^2/2.
inline cd c_infinity(double gamma_) {
  const auto [A, B] = coefficients(gamma_);
  const long double a = std::sqrt(4.0L * gamma_ - 1.0L);
  const cld ia(0, a);
  const long double pi = std::numbers::pi_v<long double>;
  auto piece = [&](cld p, cld q) {
    const cld e = p - q;  // z^(p-q) = (xi^2/2)^(p-q) e^{-i pi (p-q)/2}
    return gamma(q) / gamma(p) * std::exp(-e * std::log(2.0L)) * std::exp(cld(0, -pi / 2.0L) * e);
  };
  const cld ap = -(1.0L + ia) / 4.0L, bp = (2.0L - ia) / 2.0L;
  const cld am = -(1.0L - ia) / 4.0L, bm = (2.0L + ia) / 2.0L;
  return cd(A * piece(ap, bp) - B * piece(am, bm));
}

// Large-xi expansion R = C e^{-i xi^2/2} sum c_k xi^(-3-2k) and its
// derivative, truncated at the smallest term.
struct TailValue {
  cd R, dR;
};

inline TailValue tail(double gamma_, cd c_inf, double xi) {
  std::vector<cld> c{1.0L};
  for (int k = 0; k < 60; ++k) {
    const long double f = (2.0L * k + 2) * (2.0L * k + 3) + gamma_;
    c.push_back(cld(0, f / (2.0L * (k + 1))) * c.back());
  }
  const long double x = xi;
  cld w = 0, dw = 0;
  long double last = 1e300L;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const long double p = -3.0L - 2.0L * k;
    const cld term = c[k] * std::pow(x, p);
    if (std::abs(term) > last) break;
    last = std::abs(term);
    w += term;
    dw += c[k] * p * std::pow(x, p - 1.0L);
  }
  const cld ph = std::exp(cld(0, -0.5L * x * x));
  return {cd((cld)c_inf * ph * w), cd((cld)c_inf * ph * (dw + cld(0, -x) * w))};
}

// Inward Dormand-Prince integration of
//   R'' + (2/xi + i xi) R' + gamma R / xi^2 = 0
// from xi_start, seeded with the tail expansion.  xs must be decreasing.
inline std::vector<cd> integrate_inward(double gamma_, double xi_start, const std::vector<double>& xs,
                                        double tol = 1e-13) {
  using state = std::array<double, 4>;  // Re R, Im R, Re R', Im R'
  namespace ode = boost::numeric::odeint;
  const TailValue seed = tail(gamma_, c_infinity(gamma_), xi_start);
  state y{seed.R.real(), seed.R.imag(), seed.dR.real(), seed.dR.imag()};
  auto rhs = [gamma_](const state& s, state& d, double xi) {
    const cd R(s[0], s[1]), dR(s[2], s[3]);
    const cd d2 = -(2.0 / xi + cd(0, xi)) * dR - gamma_ * R / (xi * xi);
    d = {dR.real(), dR.imag(), d2.real(), d2.imag()};
  };
  std::vector<double> times{xi_start};
  times.insert(times.end(), xs.begin(), xs.end());
  std::vector<cd> out;
  auto observe = [&](const state& s, double) { out.emplace_back(s[0], s[1]); };
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<state>());
  ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), -1e-3, observe);
  out.erase(out.begin());
  return out;
}

// Free radial evolution of u0(x) = x exp(-(x-x0)^2 / (2 w^2)) with u(0) = 0,
// via the odd extension.  hbar = m = 1 scaled by hbar_over_m.
inline cd free_gaussian(double x, double t, double x0, double w, double hbar_over_m = 1.0) {
  const cd s = 1.0 + cd(0, hbar_over_m * t / (w * w));
  auto piece = [&](double y, double shift) {
    // (y + shift) e^{-y^2/2w^2} evolved freely
    const cd g = std::exp(-y * y / (2.0 * w * w * s));
    return y * std::pow(s, -1.5) * g + shift * std::pow(s, -0.5) * g;
  };
  // x [e^{-(x-x0)^2/2w^2} + e^{-(x+x0)^2/2w^2}], each term in its own variable
  return piece(x - x0, x0) + piece(x + x0, -x0);
}

// <r> of the freely evolved packet by composite Simpson on [0, x_max].
inline double free_gaussian_r_mean(double t, double x0, double w, double x_max = 80.0, int n = 40000) {
  const double h = x_max / n;
  double s0 = 0.0, s1 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = k * h;
    const double wgt = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double a = std::norm(free_gaussian(x, t, x0, w));
    s0 += wgt * a;
    s1 += wgt * x * a;
  }
  return s1 / s0;
}

}  // namespace oracle
