#pragma once

// Exact self-similar radial profile R(xi) of the collapsing state, its
// derivatives and its asymptotic forms.
//
// With s_pm = -1/2 -+ i alpha/2 and z = -i xi^2 / 2,
//   R(xi) = C [ A xi^(s_+) 1F1(-(1 + i alpha)/4; (2 - i alpha)/2; z)
//             - B xi^(s_-) 1F1(-(1 - i alpha)/4; (2 + i alpha)/2; z) ]
//   A = 2^(i alpha/2) Gamma(1 + i alpha/2) Gamma((5 - i alpha)/4)
//   B = e^(-pi alpha/4) Gamma(1 - i alpha/2) Gamma((5 + i alpha)/4)
// All imaginary powers of positive reals are taken on the n = 0 branch.
//
// For xi^2 > 80 the profile is evaluated from its large-xi expansion
//   R = C_inf e^(-i xi^2/2) xi^-3 w(xi),  w = sum_k c_k xi^(-2k),
//   c_0 = 1,  c_(k+1) = i [(2k+2)(2k+3) + gamma] c_k / (2(k+1)),
// with C_inf matched to the series just below the switch.

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <vector>

#include "qcollapse/errors.hpp"
#include "qcollapse/format.hpp"
#include "qcollapse/params.hpp"
#include "qcollapse/specfun.hpp"

namespace qcollapse {

/// z^(sign * i alpha / 2) on branch n, for real z > 0:
///   exp(sign * (i alpha/2) (log z + 2 pi i n)).
/// Modulus exp(-sign * pi alpha n), phase sign * (alpha/2) log z.
inline complex_value imaginary_power(double z, double alpha, int n = 0, int sign = +1) {
  if (!(z > 0.0)) throw DomainError("imaginary_power: requires z > 0");
  const double s = sign >= 0 ? 1.0 : -1.0;
  const double modulus = std::exp(-s * std::numbers::pi * alpha * double(n));
  return std::polar(modulus, s * 0.5 * alpha * std::log(z));
}

/// R and its first two xi-derivatives at one point.
struct ProfileJet {
  complex_value R;
  complex_value dR;
  complex_value d2R;
};

/// Accuracy used by the profile for its 1F1 evaluations.
inline EvalAccuracy profile_accuracy() {
  EvalAccuracy acc;
  acc.rel_tol = 1e-16;
  return acc;
}

class SelfSimilarProfile {
 public:
  static constexpr double switch_xi2 = 80.0;

  explicit SelfSimilarProfile(const CollapseParams& params, complex_value normalization = 1.0,
                              EvalAccuracy acc = profile_accuracy())
      : params_(params), normalization_(normalization), acc_(acc) {
    acc_.validate();
    if (!(params.gamma > 0.25)) throw FallConditionViolated("profile requires gamma > 1/4");
    const double alpha = params.alpha;
    const complex_value ia(0.0, alpha);
    a_plus_ = -(1.0 + ia) / 4.0;
    b_plus_ = (2.0 - ia) / 2.0;
    a_minus_ = -(1.0 - ia) / 4.0;
    b_minus_ = (2.0 + ia) / 2.0;
    s_plus_ = complex_value(-0.5, -0.5 * alpha);
    s_minus_ = complex_value(-0.5, 0.5 * alpha);
    A_ = imaginary_power(2.0, alpha) *
         std::exp(complex_log_gamma(1.0 + ia / 2.0) + complex_log_gamma((5.0 - ia) / 4.0));
    B_ = std::exp(-std::numbers::pi * alpha / 4.0 + complex_log_gamma(1.0 - ia / 2.0) +
                  complex_log_gamma((5.0 + ia) / 4.0));
    build_tail_coefficients();
    fit_c_infinity();
  }

  const CollapseParams& params() const { return params_; }
  complex_value normalization() const { return normalization_; }
  complex_value coefficient_A() const { return A_; }
  complex_value coefficient_B() const { return B_; }

  /// C * C_inf: amplitude of the e^(-i xi^2/2) xi^-3 tail.
  complex_value c_infinity() const { return normalization_ * c_inf_; }
  /// Relative spread of the matching samples used to fix C_inf.
  double c_infinity_match_spread() const { return c_inf_spread_; }
  /// Majorization constant: |R|^2 <= C_0 / xi for the small-xi form.
  double c_zero() const {
    const double s = std::abs(A_) + std::abs(B_);
    return std::norm(normalization_) * s * s;
  }
  const std::vector<complex_value>& tail_coefficients() const { return tail_c_; }

  complex_value operator()(double xi) const { return jet(xi).R; }

  ProfileJet jet(double xi) const {
    check_xi(xi);
    ProfileJet j = xi * xi > switch_xi2 ? tail_jet(xi) : series_jet(xi);
    j.R *= normalization_;
    j.dR *= normalization_;
    j.d2R *= normalization_;
    return j;
  }

  /// Closed form evaluated from the 1F1 series regardless of xi.
  ProfileJet series_jet(double xi) const {
    check_xi(xi);
    const complex_value z(0.0, -0.5 * xi * xi);
    const ProfileJet p = branch_jet(xi, s_plus_, kummer_1f1_jet(a_plus_, b_plus_, z, acc_));
    const ProfileJet m = branch_jet(xi, s_minus_, kummer_1f1_jet(a_minus_, b_minus_, z, acc_));
    return {A_ * p.R - B_ * m.R, A_ * p.dR - B_ * m.dR, A_ * p.d2R - B_ * m.d2R};
  }

  /// Large-xi expansion with C = 1, regardless of xi.
  ProfileJet tail_jet(double xi) const {
    check_xi(xi);
    const TailSeries w = tail_series(xi);
    const complex_value g = std::polar(std::pow(xi, -3.0), -0.5 * xi * xi);
    const complex_value h(-3.0 / xi, -xi);  // g'/g
    const complex_value dh(3.0 / (xi * xi), -1.0);
    const complex_value c = c_inf_;
    return {c * g * w.w, c * g * (w.dw + h * w.w),
            c * g * (w.d2w + 2.0 * h * w.dw + (h * h + dh) * w.w)};
  }

  /// Leading small-xi form: both 1F1 factors replaced by 1.
  complex_value small_xi_asymptote(double xi) const {
    check_xi(xi);
    return normalization_ / std::sqrt(xi) *
           (A_ * imaginary_power(xi, params_.alpha, 0, -1) -
            B_ * imaginary_power(xi, params_.alpha, 0, +1));
  }

  /// Normalized residual of R'' + (2/xi + i xi) R' + gamma R / xi^2 = 0.
  double ode_residual(double xi) const {
    const ProfileJet j = jet(xi);
    const complex_value t1 = j.d2R;
    const complex_value t2 = complex_value(2.0 / xi, xi) * j.dR;
    const complex_value t3 = params_.gamma * j.R / (xi * xi);
    const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
    return scale == 0.0 ? 0.0 : std::abs(t1 + t2 + t3) / scale;
  }

 private:
  struct TailSeries {
    complex_value w, dw, d2w;
  };

  static void check_xi(double xi) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("profile: xi must be finite and > 0");
  }

  // d/dxi of xi^s M(-i xi^2/2), up to second order.
  static ProfileJet branch_jet(double xi, complex_value s, const KummerJet& m) {
    const double x2 = xi * xi;
    const complex_value i(0.0, 1.0);
    const complex_value pw = std::exp(s * std::log(xi));  // xi^s, principal branch
    const complex_value value = pw * m.value;
    const complex_value d1 = pw / xi * (s * m.value - i * x2 * m.d1);
    const complex_value d2 =
        pw / x2 * (s * (s - 1.0) * m.value - i * (2.0 * s + 1.0) * x2 * m.d1 - x2 * x2 * m.d2);
    return {value, d1, d2};
  }

  void build_tail_coefficients() {
    tail_c_.clear();
    complex_value c = 1.0;
    tail_c_.push_back(c);
    for (int k = 0; k < 120; ++k) {
      const double kk = double(k);
      c *= complex_value(0.0, ((2 * kk + 2) * (2 * kk + 3) + params_.gamma) / (2 * (kk + 1)));
      if (!(std::abs(c) < 1e250)) break;
      tail_c_.push_back(c);
    }
  }

  TailSeries tail_series(double xi) const {
    // Divergent series: stop at the smallest term.
    const double inv2 = 1.0 / (xi * xi);
    TailSeries out{tail_c_[0], 0.0, 0.0};
    double pw = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < tail_c_.size(); ++k) {
      pw *= inv2;
      const complex_value term = tail_c_[k] * pw;
      const double mag = std::abs(term);
      if (mag >= last) break;
      last = mag;
      const double kk = double(k);
      out.w += term;
      out.dw += -2.0 * kk * term / xi;
      out.d2w += 2.0 * kk * (2.0 * kk + 1.0) * term * inv2;
      if (mag < 1e-18 * std::abs(out.w)) break;
    }
    return out;
  }

  // Least-squares constant through R_series / (e^(-i xi^2/2) xi^-3 w) on
  // nodes just below the switch, where both forms are accurate.
  void fit_c_infinity() {
    c_inf_ = 1.0;
    const double hi = std::sqrt(switch_xi2);
    const double lo = hi - 0.6;
    constexpr int n = 16;
    std::vector<complex_value> samples;
    samples.reserve(n);
    complex_value mean = 0.0;
    for (int k = 0; k < n; ++k) {
      const double xi = lo + (hi - lo) * double(k) / double(n - 1);
      const complex_value s = series_jet(xi).R / tail_jet(xi).R;
      samples.push_back(s);
      mean += s;
    }
    mean /= double(n);
    double spread = 0.0;
    for (const auto& s : samples) spread = std::max(spread, std::abs(s - mean));
    c_inf_ = mean;
    c_inf_spread_ = spread / std::abs(mean);
  }

  CollapseParams params_;
  complex_value normalization_;
  EvalAccuracy acc_;
  complex_value a_plus_, b_plus_, a_minus_, b_minus_;
  complex_value s_plus_, s_minus_;
  complex_value A_, B_;
  std::vector<complex_value> tail_c_;
  complex_value c_inf_ = 1.0;
  double c_inf_spread_ = 0.0;
};

// ---------------------------------------------------------------------------
// Free-function surface.

inline complex_value evaluate_R(const CollapseParams& params, double xi,
                                const EvalAccuracy& acc = profile_accuracy()) {
  return SelfSimilarProfile(params, 1.0, acc)(xi);
}

inline ProfileJet evaluate_R_derivatives(const CollapseParams& params, double xi,
                                         const EvalAccuracy& acc = profile_accuracy()) {
  return SelfSimilarProfile(params, 1.0, acc).jet(xi);
}

inline double ode_residual(const CollapseParams& params, double xi) {
  return SelfSimilarProfile(params).ode_residual(xi);
}

inline complex_value small_xi_asymptote(const CollapseParams& params, double xi) {
  return SelfSimilarProfile(params).small_xi_asymptote(xi);
}

struct TailFit {
  complex_value c_infinity;
  double relative_spread = 0.0;
};

/// Fits R(xi) xi^3 e^(+i xi^2/2) to a constant over [xi_lo, xi_hi].
inline TailFit large_xi_tail_fit(const SelfSimilarProfile& profile, double xi_lo, double xi_hi) {
  if (!(xi_lo >= 15.0)) throw InvalidInput("large_xi_tail_fit: xi_lo must be >= 15");
  if (!(xi_hi > xi_lo)) throw InvalidInput("large_xi_tail_fit: xi_hi must exceed xi_lo");
  constexpr int n = 41;
  std::vector<complex_value> samples;
  complex_value mean = 0.0;
  for (int k = 0; k < n; ++k) {
    const double xi = xi_lo + (xi_hi - xi_lo) * double(k) / double(n - 1);
    const complex_value s = profile(xi) * std::pow(xi, 3.0) * std::polar(1.0, 0.5 * xi * xi);
    samples.push_back(s);
    mean += s;
  }
  mean /= double(n);
  double spread = 0.0;
  for (const auto& s : samples) spread = std::max(spread, std::abs(s - mean));
  spread /= std::abs(mean);
  if (spread > 0.1)
    throw FitError("large_xi_tail_fit: relative spread above 10%; move the window outward");
  return {mean, spread};
}

inline TailFit large_xi_tail_fit(const CollapseParams& params, double xi_lo, double xi_hi) {
  return large_xi_tail_fit(SelfSimilarProfile(params), xi_lo, xi_hi);
}

/// Radial factor of Psi(r, t) = R(r / sqrt(-chi t)) for t < 0.
inline complex_value psi_value(const SelfSimilarProfile& profile, double r, double t) {
  if (!(r > 0.0)) throw DomainError("psi_value: r must be > 0");
  if (!(t < 0.0)) throw DomainError("psi_value: t must be < 0 (time counts down to the collapse)");
  return profile(r / std::sqrt(-profile.params().chi * t));
}

// ---------------------------------------------------------------------------
// Tabulation.

struct ProfileTable {
  CollapseParams params;
  std::vector<double> xi;
  std::vector<complex_value> R, dR, d2R;
  std::vector<double> abs2;
  complex_value C_normalization = 1.0;
  complex_value C_infinity;
  double C_zero = 0.0;
};

inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidInput("log_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> out(n);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int k = 0; k < n; ++k) out[k] = std::exp(l0 + (l1 - l0) * double(k) / double(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline ProfileTable build_profile_table(const SelfSimilarProfile& profile, const std::vector<double>& xi) {
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (!(xi[k] > 0.0)) throw InvalidInput("profile table: xi must be > 0");
    if (k > 0 && !(xi[k] > xi[k - 1])) throw InvalidInput("profile table: xi must be strictly increasing");
  }
  ProfileTable t;
  t.params = profile.params();
  t.xi = xi;
  t.C_normalization = profile.normalization();
  t.C_infinity = profile.c_infinity();
  t.C_zero = profile.c_zero();
  for (double x : xi) {
    const ProfileJet j = profile.jet(x);
    t.R.push_back(j.R);
    t.dR.push_back(j.dR);
    t.d2R.push_back(j.d2R);
    t.abs2.push_back(j.R.real() * j.R.real() + j.R.imag() * j.R.imag());
  }
  return t;
}

inline void write_profile_csv(std::ostream& os, const ProfileTable& t) {
  os << "xi,re_R,im_R,abs2_R,re_dR,im_dR\n";
  for (std::size_t k = 0; k < t.xi.size(); ++k) {
    write_csv_row(os, {t.xi[k], t.R[k].real(), t.R[k].imag(), t.abs2[k], t.dR[k].real(), t.dR[k].imag()});
  }
}

}  // namespace qcollapse
