#pragma once

// Radial time-dependent Schroedinger equation for the reduced wave function
// u = r R on a uniform grid, propagated with Crank-Nicolson.
//
// Two models for the region r < r_core:
//   capped           the potential is held constant below r_core and the wave
//                    function is propagated down to u(0) = 0.  Unitary.
//   similarity_flux  nodes below r_core are removed and the first active node
//                    sees a ghost node at r_(jb-1) taken from the exact
//                    self-similar solution.  This lets probability leave
//                    (collapse) or enter (escape) through the core the way the
//                    exact solution does; a unitary core cannot, because the
//                    self-similar norm scales as |t|^(3/2).
//
// For collapse the ghost is u_(jb-1) = rho(t) u_jb with rho the exact ratio of
// neighbouring values, an absorbing condition.  The same ratio condition on an
// escape run feeds back on itself and amplifies grid-scale modes, so escape
// runs prescribe the ghost value directly (scaled like the initial state).

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "qcollapse/errors.hpp"
#include "qcollapse/format.hpp"
#include "qcollapse/params.hpp"
#include "qcollapse/profile.hpp"

namespace qcollapse {

struct RadialGrid {
  double r_max = 40.0;
  int n_points = 8192;
  double dr = 40.0 / 8192;
  double r_core = 40.0 / 2048;

  double r(int j) const { return j * dr; }
};

/// r_core <= 0 selects the default r_max / 2048.
inline RadialGrid make_grid(double r_max = 40.0, int n_points = 8192, double r_core = 0.0) {
  if (!std::isfinite(r_max) || !(r_max > 0.0)) throw InvalidInput("grid: r_max must be > 0");
  if (n_points < 256) throw InvalidInput("grid: n_points must be >= 256");
  if (r_core <= 0.0) r_core = r_max / 2048.0;
  if (!std::isfinite(r_core) || !(r_core < r_max / 100.0))
    throw InvalidInput("grid: need 0 < r_core < r_max/100");
  return {r_max, n_points, r_max / n_points, r_core};
}

enum class CoreModel { capped, similarity_flux };

inline const char* to_string(CoreModel c) { return c == CoreModel::capped ? "capped" : "flux"; }

/// V(r_j) for j = 0..n_points.  The attractive part is capped at r_core, the
/// centrifugal part is not.  V(0) is never used (u(0) = 0) and is set to 0.
inline std::vector<double> effective_potential(const RadialGrid& grid, const CollapseParams& p) {
  const double k = p.hbar * p.hbar / (2.0 * p.mass);
  std::vector<double> v(grid.n_points + 1, 0.0);
  for (int j = 1; j <= grid.n_points; ++j) {
    const double r = grid.r(j);
    const double rc = std::max(r, grid.r_core);
    v[j] = -k * p.beta_tilde / (rc * rc) + k * p.centrifugal() / (r * r);
  }
  return v;
}

struct InitialCondition {
  enum class Kind { self_similar, gaussian, conjugated_self_similar };
  Kind kind = Kind::self_similar;
  double t0 = -1.0;
  double r0 = 5.0;
  double width = 1.0;

  static InitialCondition self_similar(double t0) { return {Kind::self_similar, t0, 0.0, 0.0}; }
  static InitialCondition conjugated_self_similar(double t0) {
    return {Kind::conjugated_self_similar, t0, 0.0, 0.0};
  }
  static InitialCondition gaussian(double r0, double width) { return {Kind::gaussian, 0.0, r0, width}; }
};

struct WavePacketState {
  RadialGrid grid;
  std::vector<complex_value> u;    // nodes 0..n_points
  double t = 0.0;
  CollapseParams params;
  std::vector<double> potential;   // may be replaced, e.g. zeros for free runs
  CoreModel core = CoreModel::capped;
  bool time_reversed = false;      // analytic reference is conj(u(r, -t))
  std::shared_ptr<const SelfSimilarProfile> profile;
  double amplitude = 1.0;          // u / u_exact, fixed by the initial normalization

  /// Index of the first propagated node.
  int first_active() const {
    if (core == CoreModel::capped) return 1;
    return std::max(2, int(std::lround(grid.r_core / grid.dr)));
  }
  int last_active() const { return grid.n_points - 1; }

  double norm() const {
    double s = 0.0;
    for (const auto& v : u) s += std::norm(v);
    return s * grid.dr;
  }

  double r_mean() const {
    double s = 0.0, w = 0.0;
    for (int j = 0; j <= grid.n_points; ++j) {
      const double a = std::norm(u[j]);
      s += grid.r(j) * a;
      w += a;
    }
    if (!(w > 0.0)) throw SolverError("r_mean: state has zero norm");
    return s / w;
  }

  /// Exact self-similar u(r, t), or its time-reversed conjugate.
  complex_value analytic(double r, double time) const {
    if (!profile) throw InvalidInput("state has no analytic reference");
    if (time_reversed) return std::conj(r * psi_value(*profile, r, -time));
    return r * psi_value(*profile, r, time);
  }

  /// |<u|u_exact(t)>|^2 / (<u|u><u_exact|u_exact>) over the active nodes.
  double fidelity() const {
    if (!profile) return std::numeric_limits<double>::quiet_NaN();
    complex_value overlap = 0.0;
    double na = 0.0, nu = 0.0;
    for (int j = first_active(); j <= last_active(); ++j) {
      const complex_value a = analytic(grid.r(j), t);
      overlap += std::conj(a) * u[j];
      na += std::norm(a);
      nu += std::norm(u[j]);
    }
    return std::norm(overlap) / (na * nu);
  }

  /// Ghost-node ratio u(r_(jb-1), t) / u(r_jb, t) for the flux core.
  complex_value core_ratio(double time) const {
    const int jb = first_active();
    return analytic(grid.r(jb - 1), time) / analytic(grid.r(jb), time);
  }

  /// Prescribed ghost value for the emitting (escape) flux core.
  complex_value core_value(double time) const {
    return amplitude * analytic(grid.r(first_active() - 1), time);
  }
};

inline void normalize(WavePacketState& s) {
  const double n = s.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw SolverError("normalize: state has zero or non-finite norm");
  const double f = 1.0 / std::sqrt(n);
  for (auto& v : s.u) v *= f;
  s.amplitude *= f;
}

/// Builds a normalized initial state.  The self-similar kinds default to the
/// flux core, Gaussians to the capped core.
inline WavePacketState init_state(const RadialGrid& grid, const CollapseParams& params,
                                  const InitialCondition& ic, CoreModel core) {
  WavePacketState s;
  s.grid = grid;
  s.params = params;
  s.potential = effective_potential(grid, params);
  s.core = core;
  s.u.assign(grid.n_points + 1, 0.0);
  using K = InitialCondition::Kind;
  if (ic.kind == K::gaussian) {
    if (core == CoreModel::similarity_flux)
      throw InvalidInput("init_state: the flux core needs a self-similar state");
    if (!(ic.width > 0.0) || !std::isfinite(ic.r0) || !(ic.r0 > 0.0) || !(ic.r0 < grid.r_max))
      throw DomainError("init_state: gaussian needs 0 < r0 < r_max and width > 0");
    s.t = 0.0;
    for (int j = 1; j < grid.n_points; ++j) {
      const double r = grid.r(j), x = (r - ic.r0) / ic.width;
      s.u[j] = r * std::exp(-0.5 * x * x);
    }
  } else {
    const bool reversed = ic.kind == K::conjugated_self_similar;
    if (!std::isfinite(ic.t0) || (reversed ? !(ic.t0 > 0.0) : !(ic.t0 < 0.0)))
      throw DomainError(reversed ? "init_state: escape run needs t0 > 0" : "init_state: collapse run needs t0 < 0");
    if (std::sqrt(params.chi * std::abs(ic.t0)) > grid.r_max / 8.0)
      throw DomainError("init_state: packet scale sqrt(chi |t0|) exceeds r_max/8");
    s.t = ic.t0;
    s.time_reversed = reversed;
    s.profile = std::make_shared<const SelfSimilarProfile>(params);
    for (int j = s.first_active(); j <= s.last_active(); ++j) s.u[j] = s.analytic(grid.r(j), s.t);
  }
  normalize(s);
  return s;
}

inline WavePacketState init_state(const RadialGrid& grid, const CollapseParams& params,
                                  const InitialCondition& ic) {
  return init_state(grid, params, ic,
                    ic.kind == InitialCondition::Kind::gaussian ? CoreModel::capped : CoreModel::similarity_flux);
}

/// One Crank-Nicolson step, in place:
///   (1 + i dt H(t+dt)/(2 hbar)) u_new = (1 - i dt H(t)/(2 hbar)) u_old.
/// H depends on t only through the flux-core ghost ratio.
inline void advance_crank_nicolson(WavePacketState& s, double dt) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidInput("step: dt must be finite and non-zero");
  const int j0 = s.first_active(), j1 = s.last_active();
  const double kin = s.params.hbar * s.params.hbar / (2.0 * s.params.mass * s.grid.dr * s.grid.dr);
  const complex_value tau(0.0, dt / (2.0 * s.params.hbar));
  const double off = -kin;
  const bool absorbing = s.core == CoreModel::similarity_flux && !s.time_reversed;
  const bool emitting = s.core == CoreModel::similarity_flux && s.time_reversed;
  complex_value ghost_old = 0.0, ghost_new = 0.0;
  if (absorbing) {
    ghost_old = s.core_ratio(s.t);
    ghost_new = s.core_ratio(s.t + dt);
  } else if (emitting) {
    ghost_old = s.core_value(s.t);
    ghost_new = s.core_value(s.t + dt);
  }
  const std::size_t m = std::size_t(j1 - j0 + 1);
  std::vector<complex_value> rhs(m), diag(m), cp(m);
  for (int j = j0; j <= j1; ++j) {
    const std::size_t k = std::size_t(j - j0);
    double d = 2.0 * kin + s.potential[j];
    complex_value hu = d * s.u[j] + off * (s.u[j - 1] + s.u[j + 1]);
    complex_value dn = d;
    if (j == j0 && absorbing) {
      hu = d * s.u[j] + off * (ghost_old * s.u[j] + s.u[j + 1]);
      dn += off * ghost_new;
    }
    rhs[k] = s.u[j] - tau * hu;
    if (j == j0 && emitting) rhs[k] = s.u[j] - tau * (d * s.u[j] + off * (ghost_old + s.u[j + 1] + ghost_new));
    diag[k] = 1.0 + tau * dn;
  }
  // Thomas algorithm; off-diagonals are all tau * off.
  const complex_value a = tau * off;
  const double tiny = 1e-300;
  complex_value piv = diag[0];
  if (std::abs(piv) < tiny) throw SolverError("step: singular tridiagonal system");
  cp[0] = a / piv;
  rhs[0] /= piv;
  for (std::size_t k = 1; k < m; ++k) {
    piv = diag[k] - a * cp[k - 1];
    if (std::abs(piv) < tiny) throw SolverError("step: singular tridiagonal system");
    cp[k] = a / piv;
    rhs[k] = (rhs[k] - a * rhs[k - 1]) / piv;
  }
  for (std::size_t k = m - 1; k-- > 0;) rhs[k] -= cp[k] * rhs[k + 1];
  for (int j = j0; j <= j1; ++j) s.u[j] = rhs[std::size_t(j - j0)];
  s.t += dt;
}

inline WavePacketState step_crank_nicolson(WavePacketState state, double dt) {
  advance_crank_nicolson(state, dt);
  return state;
}

struct EvolutionRecord {
  std::vector<double> times, norms, r_means, overlaps;

  void push(const WavePacketState& s) {
    times.push_back(s.t);
    norms.push_back(s.norm());
    r_means.push_back(s.r_mean());
    overlaps.push_back(s.fidelity());
  }
  std::size_t size() const { return times.size(); }
};

/// Collapse reached the regularization scale.  Carries everything recorded
/// up to that point.
class HaltedAtCore : public Error {
 public:
  HaltedAtCore(const std::string& what, EvolutionRecord partial)
      : Error(ErrorKind::numerical, what), record(std::move(partial)) {}
  EvolutionRecord record;
};

/// Steps from state.t to t_end, recording at the start, every record_every
/// steps and at the end.  The step count is rounded up so that the last step
/// lands on t_end exactly.
inline EvolutionRecord evolve_and_record(WavePacketState& state, double t_end, double dt, int record_every) {
  if (record_every < 1) throw InvalidInput("evolve: record_every must be >= 1");
  if (!std::isfinite(t_end) || !std::isfinite(dt) || !((t_end - state.t) / dt > 0.0))
    throw InvalidInput("evolve: (t_end - t) / dt must be > 0");
  const double t0 = state.t;
  const long n = std::max(1L, long(std::ceil((t_end - t0) / dt - 1e-9)));
  const double h = (t_end - t0) / double(n);
  const double core_stop = 5.0 * state.grid.r_core;
  EvolutionRecord rec;
  rec.push(state);
  for (long k = 1; k <= n; ++k) {
    advance_crank_nicolson(state, h);
    state.t = (k == n) ? t_end : t0 + double(k) * h;
    if (k % record_every == 0 || k == n) {
      rec.push(state);
      if (rec.r_means.back() < core_stop)
        throw HaltedAtCore("evolve: <r> fell below 5 r_core at t = " + format_double(state.t), rec);
    }
  }
  return rec;
}

struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log|value| against log|t|.
inline PowerFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw FitError("fit_power_law: length mismatch");
  if (times.size() < 8) throw FitError("fit_power_law: need at least 8 samples");
  const std::size_t n = times.size();
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::abs(times[k]) > 0.0) || !(values[k] > 0.0) || !std::isfinite(times[k]) ||
        !std::isfinite(values[k]))
      throw FitError("fit_power_law: need |t| > 0 and value > 0");
    x[k] = std::log(std::abs(times[k]));
    y[k] = std::log(values[k]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 1e-24 * n)) throw FitError("fit_power_law: times are degenerate");
  if (!(syy > 1e-24 * n)) throw FitError("fit_power_law: values are constant");
  PowerFit f;
  f.exponent = sxy / sxx;
  f.prefactor = std::exp(my - f.exponent * mx);
  double ss_res = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = y[k] - (my + f.exponent * (x[k] - mx));
    ss_res += e * e;
  }
  f.r_squared = 1.0 - ss_res / syy;
  return f;
}

inline void write_snapshot_csv(std::ostream& os, const WavePacketState& s) {
  os << "t,r,re_u,im_u,abs2_u\n";
  for (int j = 0; j <= s.grid.n_points; ++j)
    write_csv_row(os, {s.t, s.grid.r(j), s.u[j].real(), s.u[j].imag(), std::norm(s.u[j])});
}

inline void write_record_csv(std::ostream& os, const EvolutionRecord& r) {
  os << "t,norm,r_mean,fidelity\n";
  for (std::size_t k = 0; k < r.size(); ++k) write_csv_row(os, {r.times[k], r.norms[k], r.r_means[k], r.overlaps[k]});
}

}  // namespace qcollapse
