#pragma once

// Moments of the self-similar profile and the observables built from them.
//
//   I0 = int |R|^2 xi^2            (norm in similarity units)
//   I1 = int |R|^2 xi^3            (<r> = (I1/I0) sqrt(-chi t))
//   I2 = int |R'|^2 xi^2 + l(l+1)|R|^2
//   J  = int conj(R) xi^3 R'       (<H> = -i hbar J / (2 t I0))
//
// Each integral is split into a head (0, xi_min) taken from the small-xi form,
// an adaptive body on [xi_min, xi_max] and a tail (xi_max, inf) integrated
// term by term from the large-xi expansion.
//
// I2 has no finite head: |R'|^2 xi^2 ~ 1/xi at the origin, so the kinetic
// moment grows like kinetic_log_coefficient * ln(1/xi_min).  C_p is therefore
// defined with the lower limit xi_min held fixed in the similarity variable,
// which keeps <p> proportional to 1/sqrt(-chi t).

#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "qcollapse/errors.hpp"
#include "qcollapse/format.hpp"
#include "qcollapse/params.hpp"
#include "qcollapse/profile.hpp"
#include "qcollapse/quadrature.hpp"

namespace qcollapse {

inline constexpr double default_xi_min = 1e-6;

struct ProfileIntegrals {
  double I0 = 0.0, I1 = 0.0, I2 = 0.0;
  complex_value J;
  std::array<double, 4> abs_error{};  // I0, I1, I2, J
  double xi_min = default_xi_min;
  double xi_max = 0.0;
  std::size_t evaluations = 0;
};

struct ObservableReport {
  CollapseParams params;
  double norm_I0 = 0.0;
  double moment_I1 = 0.0;
  double kinetic_I2 = 0.0;
  double C_r = 0.0;
  double C_p = 0.0;
  double energy_dimless = 0.0;
  complex_value energy_J_over_I0;
  std::array<double, 3> quad_error{};  // I0, I1, I2
  double kinetic_log_coefficient = 0.0;
  double xi_min = default_xi_min;
  double xi_max = 0.0;

  double max_quad_error() const { return std::max({quad_error[0], quad_error[1], quad_error[2]}); }
};

namespace detail {

// Integrals of the small-xi form over (0, m).
struct HeadIntegrals {
  double I0, I1;
  complex_value J;
};

inline HeadIntegrals head_integrals(const SelfSimilarProfile& p, double m) {
  const complex_value A = p.coefficient_A(), B = p.coefficient_B();
  const double alpha = p.params().alpha;
  const double c2 = std::norm(p.normalization());
  const complex_value ia(0.0, alpha);
  const complex_value sp(-0.5, -0.5 * alpha), sm(-0.5, 0.5 * alpha);
  auto pow_c = [&](complex_value e) { return std::exp(e * std::log(m)); };
  const double aa = std::norm(A) + std::norm(B);
  const complex_value cross = A * std::conj(B);
  HeadIntegrals h;
  h.I0 = c2 * (aa * m * m / 2.0 - 2.0 * std::real(cross * pow_c(2.0 - ia) / (2.0 - ia)));
  h.I1 = c2 * (aa * m * m * m / 3.0 - 2.0 * std::real(cross * pow_c(3.0 - ia) / (3.0 - ia)));
  h.J = c2 * (std::norm(A) * sp * m * m / 2.0 - std::conj(A) * B * sm * pow_c(2.0 + ia) / (2.0 + ia) -
              cross * sp * pow_c(2.0 - ia) / (2.0 - ia) + std::norm(B) * sm * m * m / 2.0);
  return h;
}

struct TailIntegrals {
  double I0, I1, I2;
  complex_value J;
};

// With R = C e^(-i xi^2/2) xi^-3 w and R' = -i xi C e^(-i xi^2/2) xi^-3 v,
// v_k = c_k - i(2k+1) c_(k-1), every tail integrand is a series in xi^-2.
inline TailIntegrals tail_integrals(const SelfSimilarProfile& p, double X) {
  const auto& c = p.tail_coefficients();
  const std::size_t K = std::min<std::size_t>(c.size(), 12);
  std::vector<complex_value> v(K);
  for (std::size_t k = 0; k < K; ++k)
    v[k] = c[k] - (k > 0 ? complex_value(0.0, 2.0 * double(k) + 1.0) * c[k - 1] : 0.0);
  // Products of truncated series, coefficient of xi^(-2m).
  std::vector<double> ww(K, 0.0), vv(K, 0.0);
  std::vector<complex_value> wv(K, 0.0);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t k = 0; j + k < K; ++k) {
      ww[j + k] += std::real(c[j] * std::conj(c[k]));
      vv[j + k] += std::real(v[j] * std::conj(v[k]));
      wv[j + k] += std::conj(c[j]) * v[k];
    }
  // int_X^inf xi^(-q-2m) = X^(1-q-2m) / (q + 2m - 1)
  auto moment = [&](double q, double m) { return std::pow(X, 1.0 - q - 2.0 * m) / (q + 2.0 * m - 1.0); };
  const double amp = std::norm(p.c_infinity());
  const double l2 = p.params().centrifugal();
  TailIntegrals t{0.0, 0.0, 0.0, 0.0};
  for (std::size_t m = 0; m < K; ++m) {
    const double md = double(m);
    t.I0 += ww[m] * moment(4.0, md);
    t.I1 += ww[m] * moment(3.0, md);
    t.I2 += vv[m] * moment(2.0, md) + l2 * ww[m] * moment(6.0, md);
    t.J += wv[m] * moment(2.0, md);
  }
  t.I0 *= amp;
  t.I1 *= amp;
  t.I2 *= amp;
  t.J *= complex_value(0.0, -amp);
  return t;
}

inline std::vector<double> observable_breaks(double xi_min, double xi_max) {
  std::vector<double> b;
  const double decades = std::log10(1.0 / xi_min);
  const int n_log = std::max(1, int(std::ceil(4.0 * decades)));
  for (int k = 0; k < n_log; ++k) b.push_back(xi_min * std::pow(1.0 / xi_min, double(k) / n_log));
  const double sw = std::sqrt(SelfSimilarProfile::switch_xi2);
  for (double x = 1.0; x < xi_max - 1e-12; x += 0.5) {
    if (x < sw && x + 0.5 > sw) {
      b.push_back(x);
      b.push_back(sw);
      continue;
    }
    b.push_back(x);
  }
  b.push_back(xi_max);
  return b;
}

}  // namespace detail

/// All four profile integrals with error estimates.
inline ProfileIntegrals profile_integrals(const SelfSimilarProfile& profile, double xi_max, double tol,
                                         double xi_min = default_xi_min) {
  if (!(xi_max >= 30.0)) throw InvalidInput("observables: xi_max must be >= 30");
  if (!(tol > 0.0)) throw InvalidInput("observables: tol must be > 0");
  if (!(xi_min > 0.0) || !(xi_min < 1.0)) throw InvalidInput("observables: need 0 < xi_min < 1");
  const double l2 = profile.params().centrifugal();
  auto integrand = [&](double xi) -> Vec<5> {
    const ProfileJet j = profile.jet(xi);
    const double r2 = std::norm(j.R);
    const complex_value jj = std::conj(j.R) * xi * xi * xi * j.dR;
    return {r2 * xi * xi, r2 * xi * xi * xi, std::norm(j.dR) * xi * xi + l2 * r2, jj.real(), jj.imag()};
  };
  const auto body = integrate_adaptive<5>(integrand, detail::observable_breaks(xi_min, xi_max), 0.1 * tol);
  const auto head = detail::head_integrals(profile, xi_min);
  const auto tail = detail::tail_integrals(profile, xi_max);

  ProfileIntegrals out;
  out.xi_min = xi_min;
  out.xi_max = xi_max;
  out.evaluations = body.evaluations;
  out.I0 = head.I0 + body.value[0] + tail.I0;
  out.I1 = head.I1 + body.value[1] + tail.I1;
  out.I2 = body.value[2] + tail.I2;
  out.J = head.J + complex_value(body.value[3], body.value[4]) + tail.J;
  out.abs_error = {body.error[0], body.error[1], body.error[2], std::hypot(body.error[3], body.error[4])};
  const double vals[4] = {out.I0, out.I1, out.I2, std::abs(out.J)};
  for (int k = 0; k < 4; ++k)
    if (!body.converged || out.abs_error[k] > tol * std::abs(vals[k]))
      throw QuadratureError("observables: quadrature error estimate exceeds tolerance");
  return out;
}

/// Fills the integral part of an ObservableReport (I0, I1, I2 and errors).
inline ObservableReport radial_moment_integrals(const SelfSimilarProfile& profile, double xi_max = 30.0,
                                                double tol = 1e-10, double xi_min = default_xi_min) {
  const ProfileIntegrals in = profile_integrals(profile, xi_max, tol, xi_min);
  ObservableReport r;
  r.params = profile.params();
  r.norm_I0 = in.I0;
  r.moment_I1 = in.I1;
  r.kinetic_I2 = in.I2;
  r.quad_error = {in.abs_error[0], in.abs_error[1], in.abs_error[2]};
  r.energy_J_over_I0 = in.J / in.I0;
  r.energy_dimless = std::abs(in.J) / in.I0;
  const double ab = std::norm(profile.coefficient_A()) + std::norm(profile.coefficient_B());
  r.kinetic_log_coefficient = r.params.beta_tilde * ab * std::norm(profile.normalization()) / in.I0;
  r.xi_min = xi_min;
  r.xi_max = xi_max;
  return r;
}

inline ObservableReport radial_moment_integrals(const CollapseParams& params, double xi_max = 30.0,
                                                double tol = 1e-10) {
  return radial_moment_integrals(SelfSimilarProfile(params), xi_max, tol);
}

struct ScalingConstants {
  double C_r;
  double C_p;
};

inline ScalingConstants scaling_constants(const ObservableReport& r) {
  if (!(r.norm_I0 > 0.0) || !(r.moment_I1 > 0.0) || !(r.kinetic_I2 > 0.0))
    throw InvalidInput("scaling_constants: report integrals are not populated");
  return {r.moment_I1 / r.norm_I0, std::sqrt(r.kinetic_I2 / r.norm_I0)};
}

/// Integrals plus C_r, C_p and the energy coefficient in one call.
inline ObservableReport compute_observables(const SelfSimilarProfile& profile, double xi_max = 30.0,
                                            double tol = 1e-10) {
  ObservableReport r = radial_moment_integrals(profile, xi_max, tol);
  const ScalingConstants s = scaling_constants(r);
  r.C_r = s.C_r;
  r.C_p = s.C_p;
  return r;
}

inline ObservableReport compute_observables(const CollapseParams& params, double xi_max = 30.0,
                                            double tol = 1e-10) {
  return compute_observables(SelfSimilarProfile(params), xi_max, tol);
}

struct MeanEnergy {
  complex_value E;        // i hbar <Psi|dPsi/dt> / <Psi|Psi>
  double E_dimless = 0.0; // |J| / I0
  complex_value J_over_I0;
};

/// Mean energy at time t < 0, E = -i hbar J / (2 t I0).
inline MeanEnergy mean_energy(const CollapseParams& params, double t, double xi_max = 30.0,
                              double tol = 1e-10) {
  if (!(t < 0.0)) throw DomainError("mean_energy: t must be < 0");
  const ProfileIntegrals in = profile_integrals(SelfSimilarProfile(params), xi_max, tol);
  MeanEnergy e;
  e.J_over_I0 = in.J / in.I0;
  e.E = complex_value(0.0, -params.hbar / (2.0 * t)) * e.J_over_I0;
  e.E_dimless = std::abs(in.J) / in.I0;
  return e;
}

struct Expectations {
  double r_mean;
  double p_mean;
  double uncertainty_product;
};

/// <r>, <p> and their product at time t < 0.
inline Expectations expectations_at_time(const ObservableReport& r, double t) {
  if (!(t < 0.0)) throw DomainError("expectations_at_time: t must be < 0");
  const double scale = std::sqrt(-r.params.chi * t);
  Expectations e;
  e.r_mean = r.C_r * scale;
  e.p_mean = r.params.hbar * r.C_p / scale;
  e.uncertainty_product = r.params.hbar * r.C_r * r.C_p;
  return e;
}

inline void write_observables_csv_header(std::ostream& os) {
  os << "gamma,I0,I1,I2,C_r,C_p,E_dimless,quad_error\n";
}

inline void write_observables_csv_row(std::ostream& os, const ObservableReport& r) {
  write_csv_row(os, {r.params.gamma, r.norm_I0, r.moment_I1, r.kinetic_I2, r.C_r, r.C_p, r.energy_dimless,
                     r.max_quad_error()});
}

inline void write_observables_text(std::ostream& os, const ObservableReport& r) {
  os << "gamma                   " << format_double(r.params.gamma) << "\n"
     << "alpha                   " << format_double(r.params.alpha) << "\n"
     << "I0 = int |R|^2 xi^2     " << format_double(r.norm_I0) << "  (+- " << format_double(r.quad_error[0]) << ")\n"
     << "I1 = int |R|^2 xi^3     " << format_double(r.moment_I1) << "  (+- " << format_double(r.quad_error[1]) << ")\n"
     << "I2 (xi >= " << format_double(r.xi_min) << ")    " << format_double(r.kinetic_I2) << "  (+- "
     << format_double(r.quad_error[2]) << ")\n"
     << "C_r = I1/I0             " << format_double(r.C_r) << "\n"
     << "C_p = sqrt(I2/I0)       " << format_double(r.C_p) << "\n"
     << "C_r * C_p               " << format_double(r.C_r * r.C_p) << "\n"
     << "J/I0                    " << format_double(r.energy_J_over_I0.real()) << " "
     << (r.energy_J_over_I0.imag() < 0 ? "- " : "+ ") << format_double(std::abs(r.energy_J_over_I0.imag()))
     << "i\n"
     << "E_dimless = |J|/I0      " << format_double(r.energy_dimless) << "\n"
     << "kinetic log coefficient " << format_double(r.kinetic_log_coefficient)
     << "  (d(I2/I0)/d ln(1/xi_min))\n";
}

}  // namespace qcollapse
