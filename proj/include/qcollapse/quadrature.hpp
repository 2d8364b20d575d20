#pragma once

// Globally adaptive Gauss-Kronrod (10/21) quadrature for vector-valued
// integrands sharing one set of nodes.  Panels are bisected worst-first until
// every component meets its relative tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qcollapse/errors.hpp"

namespace qcollapse {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct QuadratureResult {
  Vec<N> value{};
  Vec<N> error{};
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

template <std::size_t N>
struct Panel {
  double a = 0.0, b = 0.0;
  Vec<N> kronrod{}, gauss{}, l1{};
};

template <std::size_t N, class F>
Panel<N> gk21_panel(F& f, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  Panel<N> p;
  p.a = a;
  p.b = b;
  const Vec<N> f0 = f(mid);
  for (std::size_t c = 0; c < N; ++c) {
    p.kronrod[c] = wk[0] * f0[c];
    p.l1[c] = wk[0] * std::abs(f0[c]);
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Vec<N> fp = f(mid + half * x[i]);
    const Vec<N> fm = f(mid - half * x[i]);
    for (std::size_t c = 0; c < N; ++c) {
      p.kronrod[c] += wk[i] * (fp[c] + fm[c]);
      p.l1[c] += wk[i] * (std::abs(fp[c]) + std::abs(fm[c]));
      if (i % 2 == 1) p.gauss[c] += wg[i / 2] * (fp[c] + fm[c]);
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    p.kronrod[c] *= half;
    p.gauss[c] *= half;
    p.l1[c] *= std::abs(half);
  }
  return p;
}

}  // namespace detail

/// Integrates f over [breaks.front(), breaks.back()], starting from the
/// panels given by breaks.  Stops when each component's summed |K - G|
/// error is below rel_tol times its value (or at the roundoff floor).
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, const std::vector<double>& breaks, double rel_tol,
                                       std::size_t max_panels = 20000) {
  if (breaks.size() < 2) throw InvalidInput("integrate_adaptive: need at least one panel");
  std::size_t calls = 0;
  auto counted = [&](double x) {
    ++calls;
    return f(x);
  };
  std::vector<detail::Panel<N>> panels;
  panels.reserve(breaks.size() * 4);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) throw InvalidInput("integrate_adaptive: breaks must increase");
    panels.push_back(detail::gk21_panel<N>(counted, breaks[k], breaks[k + 1]));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();

  QuadratureResult<N> out;
  for (;;) {
    Vec<N> total{}, err{}, l1{};
    for (const auto& p : panels) {
      for (std::size_t c = 0; c < N; ++c) {
        total[c] += p.kronrod[c];
        err[c] += std::abs(p.kronrod[c] - p.gauss[c]);
        l1[c] += p.l1[c];
      }
    }
    Vec<N> target{};
    bool done = true;
    for (std::size_t c = 0; c < N; ++c) {
      target[c] = std::max(rel_tol * std::abs(total[c]), 50.0 * eps * l1[c]);
      if (err[c] > target[c]) done = false;
    }
    out.value = total;
    out.error = err;
    out.panels = panels.size();
    if (done || panels.size() >= max_panels) {
      out.converged = done;
      break;
    }
    // Bisect the panel with the largest error relative to its component target.
    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t k = 0; k < panels.size(); ++k) {
      double score = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        if (target[c] > 0.0)
          score = std::max(score, std::abs(panels[k].kronrod[c] - panels[k].gauss[c]) / target[c]);
      }
      if (score > worst_score) {
        worst_score = score;
        worst = k;
      }
    }
    const double a = panels[worst].a, b = panels[worst].b, mid = 0.5 * (a + b);
    panels[worst] = detail::gk21_panel<N>(counted, a, mid);
    panels.push_back(detail::gk21_panel<N>(counted, mid, b));
  }
  out.evaluations = calls;
  return out;
}

}  // namespace qcollapse
