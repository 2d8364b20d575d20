#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcollapse/observables.hpp"
#include "qcollapse/tdse.hpp"

using namespace qcollapse;
using cd = std::complex<double>;

namespace {

WavePacketState free_packet(const RadialGrid& g, double r0, double w) {
  WavePacketState s = init_state(g, params_from_gamma(1.0), InitialCondition::gaussian(r0, w));
  std::fill(s.potential.begin(), s.potential.end(), 0.0);
  return s;
}

double max_diff(const WavePacketState& a, const WavePacketState& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.u.size(); ++j) m = std::max(m, std::abs(a.u[j] - b.u[j]));
  return m;
}

}  // namespace

TEST(Grid, DefaultsAndValidation) {
  const RadialGrid g = make_grid();
  EXPECT_EQ(g.n_points, 8192);
  EXPECT_DOUBLE_EQ(g.dr, 40.0 / 8192);
  EXPECT_DOUBLE_EQ(g.r_core, 40.0 / 2048);
  EXPECT_DOUBLE_EQ(g.r(4096), 20.0);
  EXPECT_DOUBLE_EQ(make_grid(10.0, 1000, 0.05).r_core, 0.05);
  EXPECT_THROW(make_grid(0.0), InvalidInput);
  EXPECT_THROW(make_grid(40.0, 100), InvalidInput);
  EXPECT_THROW(make_grid(40.0, 1024, 0.5), InvalidInput);
  EXPECT_THROW(make_grid(NAN), InvalidInput);
}

TEST(Potential, InverseSquareWithCappedCore) {
  const RadialGrid g = make_grid(10.0, 1000, 0.05);
  const auto v = effective_potential(g, derive_params(2.0, 0));
  ASSERT_EQ(v.size(), 1001u);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[100], -1.0);  // -beta/(2 r^2) at r = 1
  EXPECT_DOUBLE_EQ(v[2], -2.0 / (2.0 * 0.05 * 0.05));
  EXPECT_DOUBLE_EQ(v[1], v[2]);
  const auto c = effective_potential(g, derive_params(4.0, 1));
  EXPECT_DOUBLE_EQ(c[100], -1.0);  // (-4 + 2) / 2
  EXPECT_DOUBLE_EQ(c[1], -4.0 / (2.0 * 0.05 * 0.05) + 2.0 / (2.0 * 0.01 * 0.01));
}

TEST(Init, SelfSimilarMatchesProfileMoment) {
  const auto p = params_from_gamma(1.0);
  const WavePacketState s = init_state(make_grid(), p, InitialCondition::self_similar(-1.0));
  EXPECT_EQ(s.core, CoreModel::similarity_flux);
  EXPECT_NEAR(s.norm(), 1.0, 1e-14);
  EXPECT_NEAR(s.fidelity(), 1.0, 1e-14);
  const double C_r = compute_observables(p).C_r;
  EXPECT_NEAR(s.r_mean(), C_r, 0.01 * C_r);
  for (int j = 0; j < s.first_active(); ++j) EXPECT_EQ(s.u[j], cd(0.0));
  EXPECT_EQ(s.u.back(), cd(0.0));
}

TEST(Init, EscapeIsNodewiseConjugate) {
  const auto p = params_from_gamma(1.0);
  const RadialGrid g = make_grid(40.0, 2048);
  const auto a = init_state(g, p, InitialCondition::self_similar(-0.5));
  const auto b = init_state(g, p, InitialCondition::conjugated_self_similar(0.5));
  EXPECT_TRUE(b.time_reversed);
  for (std::size_t j = 0; j < a.u.size(); ++j) EXPECT_EQ(b.u[j], std::conj(a.u[j]));
}

TEST(Init, GaussianAndErrors) {
  const RadialGrid g = make_grid(20.0, 1024);
  const auto p = params_from_gamma(1.0);
  const auto s = init_state(g, p, InitialCondition::gaussian(5.0, 1.0));
  EXPECT_EQ(s.core, CoreModel::capped);
  EXPECT_NEAR(s.norm(), 1.0, 1e-14);
  EXPECT_NEAR(s.r_mean(), 5.0 + 1.0 / 5.0, 0.01);
  EXPECT_TRUE(std::isnan(s.fidelity()));
  EXPECT_THROW(init_state(g, p, InitialCondition::gaussian(5.0, 1.0), CoreModel::similarity_flux), InvalidInput);
  EXPECT_THROW(init_state(g, p, InitialCondition::gaussian(25.0, 1.0)), DomainError);
  EXPECT_THROW(init_state(g, p, InitialCondition::gaussian(5.0, 0.0)), DomainError);
  EXPECT_THROW(init_state(g, p, InitialCondition::self_similar(0.5)), DomainError);
  EXPECT_THROW(init_state(g, p, InitialCondition::conjugated_self_similar(-0.5)), DomainError);
  EXPECT_THROW(init_state(g, p, InitialCondition::self_similar(-10.0)), DomainError);  // sqrt(10) > 20/8
}

TEST(CrankNicolson, ForwardBackwardIsIdentity) {
  WavePacketState s = init_state(make_grid(20.0, 1024, 0.05), params_from_gamma(1.0),
                                 InitialCondition::gaussian(5.0, 1.0));
  const WavePacketState start = s;
  for (int k = 0; k < 20; ++k) advance_crank_nicolson(s, 1e-3);
  for (int k = 0; k < 20; ++k) advance_crank_nicolson(s, -1e-3);
  EXPECT_LE(max_diff(s, start), 1e-10);
  EXPECT_THROW(advance_crank_nicolson(s, 0.0), InvalidInput);
}

TEST(CrankNicolson, CappedCoreConservesNorm) {
  WavePacketState s = init_state(make_grid(20.0, 1024, 0.05), params_from_gamma(1.0),
                                 InitialCondition::gaussian(3.0, 0.7));
  double worst_step = 0.0, last = s.norm();
  const double start = last;
  for (int k = 0; k < 10000; ++k) {
    advance_crank_nicolson(s, 1e-3);
    const double n = s.norm();
    worst_step = std::max(worst_step, std::abs(n - last));
    last = n;
  }
  EXPECT_LE(worst_step, 1e-12);
  EXPECT_LE(std::abs(last - start), 1e-9);
}

TEST(CrankNicolson, StepReturnsCopy) {
  const WavePacketState s = init_state(make_grid(20.0, 512), params_from_gamma(1.0), InitialCondition::gaussian(5.0, 1.0));
  const WavePacketState t = step_crank_nicolson(s, 1e-3);
  EXPECT_EQ(s.t, 0.0);
  EXPECT_GT(max_diff(s, t), 0.0);
}

// Free radial packet against the image-method solution.
TEST(CrankNicolson, FreeGaussianMatchesImageSolution) {
  WavePacketState s = free_packet(make_grid(40.0, 4096, 0.05), 5.0, 1.0);
  evolve_and_record(s, 1.0, 1e-3, 100);
  double on = 0.0;
  for (int j = 1; j < s.grid.n_points; ++j) on += std::norm(oracle::free_gaussian(s.grid.r(j), 1.0, 5.0, 1.0));
  const double scale = std::sqrt(on * s.grid.dr);
  double worst = 0.0, peak = 0.0;
  for (int j = 1; j < s.grid.n_points; ++j) {
    const cd want = oracle::free_gaussian(s.grid.r(j), 1.0, 5.0, 1.0) / scale;
    worst = std::max(worst, std::abs(s.u[j] - want));
    peak = std::max(peak, std::abs(want));
  }
  EXPECT_LE(worst, 0.01 * peak);
  EXPECT_NEAR(s.r_mean(), oracle::free_gaussian_r_mean(1.0, 5.0, 1.0), 0.01 * s.r_mean());
}

TEST(CrankNicolson, FreeSpreadingIsBallistic) {
  WavePacketState s = free_packet(make_grid(200.0, 8192, 0.2), 1.0, 0.5);
  const auto rec = evolve_and_record(s, 10.0, 1e-2, 20);
  std::vector<double> t, r;
  for (std::size_t k = 0; k < rec.size(); ++k)
    if (rec.times[k] >= 4.0) {
      t.push_back(rec.times[k]);
      r.push_back(rec.r_means[k]);
    }
  const PowerFit f = fit_power_law(t, r);
  EXPECT_NEAR(f.exponent, 1.0, 0.05);
}

// Second order in (dr, dt) jointly: halving both should quarter the change.
TEST(CrankNicolson, SecondOrderConvergence) {
  auto run = [](int n, double dt) {
    WavePacketState s = init_state(make_grid(20.0, n, 0.05), params_from_gamma(1.0),
                                   InitialCondition::gaussian(5.0, 1.0));
    evolve_and_record(s, 0.5, dt, 1000000);
    return s.r_mean();
  };
  const double a = run(256, 8e-3), b = run(512, 4e-3), c = run(1024, 2e-3);
  const double order = std::log2(std::abs(a - b) / std::abs(b - c));
  EXPECT_GE(order, 1.8) << a << " " << b << " " << c;
}

TEST(Evolve, RecordsStartStrideAndEnd) {
  WavePacketState s = init_state(make_grid(20.0, 512), params_from_gamma(1.0), InitialCondition::gaussian(5.0, 1.0));
  const auto rec = evolve_and_record(s, 0.105, 0.01, 4);
  ASSERT_EQ(rec.size(), 4u);  // k = 0, 4, 8, 11
  EXPECT_EQ(rec.times.front(), 0.0);
  EXPECT_EQ(rec.times.back(), 0.105);
  EXPECT_EQ(s.t, 0.105);
  EXPECT_THROW(evolve_and_record(s, 0.0, 0.01, 4), InvalidInput);
  EXPECT_THROW(evolve_and_record(s, 1.0, 0.01, 0), InvalidInput);
}

TEST(Evolve, ShortCollapseFollowsSimilaritySolution) {
  const auto p = params_from_gamma(1.0);
  WavePacketState s = init_state(make_grid(40.0, 4096), p, InitialCondition::self_similar(-1.0));
  const auto rec = evolve_and_record(s, -0.5, 5e-4, 100);
  const double C_r = compute_observables(p).C_r;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_GT(rec.overlaps[k], 0.99);
    EXPECT_NEAR(rec.r_means[k] / std::sqrt(-rec.times[k]), C_r, 0.02 * C_r);
  }
}

TEST(Evolve, ShortEscapeFollowsConjugateSolution) {
  const auto p = params_from_gamma(1.0);
  WavePacketState s = init_state(make_grid(), p, InitialCondition::conjugated_self_similar(0.1));
  const auto rec = evolve_and_record(s, 0.3, 5e-4, 100);
  const double C_r = compute_observables(p).C_r;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_GT(rec.overlaps[k], 0.99);
    EXPECT_NEAR(rec.r_means[k] / std::sqrt(rec.times[k]), C_r, 0.02 * C_r);
  }
}

TEST(Evolve, HaltsAtTheCore) {
  WavePacketState s = init_state(make_grid(40.0, 1024, 0.35), params_from_gamma(1.0), InitialCondition::self_similar(-1.0));
  try {
    evolve_and_record(s, -0.01, 1e-3, 10);
    FAIL() << "expected HaltedAtCore";
  } catch (const HaltedAtCore& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_GE(e.record.size(), 2u);
    EXPECT_LT(e.record.r_means.back(), 5.0 * 0.35);
  }
}

TEST(PowerLaw, ExactData) {
  std::vector<double> t, v;
  for (int k = 1; k <= 20; ++k) {
    t.push_back(-0.05 * k);
    v.push_back(1.7 * std::pow(0.05 * k, 0.5));
  }
  const PowerFit f = fit_power_law(t, v);
  EXPECT_NEAR(f.exponent, 0.5, 1e-13);
  EXPECT_NEAR(f.prefactor, 1.7, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-13);
}

TEST(PowerLaw, Errors) {
  const std::vector<double> t{1, 2, 3, 4, 5, 6, 7, 8}, v{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_THROW(fit_power_law({1, 2, 3}, {1, 2, 3}), FitError);
  EXPECT_THROW(fit_power_law(t, {1, 2, 3, 4, 5, 6, 7}), FitError);
  EXPECT_THROW(fit_power_law({0, 2, 3, 4, 5, 6, 7, 8}, v), FitError);
  EXPECT_THROW(fit_power_law(t, {1, 2, 3, -4, 5, 6, 7, 8}), FitError);
  EXPECT_THROW(fit_power_law({2, 2, 2, 2, 2, 2, 2, 2}, v), FitError);
  EXPECT_THROW(fit_power_law(t, {3, 3, 3, 3, 3, 3, 3, 3}), FitError);
}

TEST(Output, CsvHeaders) {
  WavePacketState s = init_state(make_grid(20.0, 256), params_from_gamma(1.0), InitialCondition::gaussian(5.0, 1.0));
  std::ostringstream a, b;
  write_snapshot_csv(a, s);
  write_record_csv(b, evolve_and_record(s, 0.02, 0.01, 1));
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,r,re_u,im_u,abs2_u");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "t,norm,r_mean,fidelity");
  std::istringstream is(b.str());
  EXPECT_EQ(read_csv(is).rows(), 3u);
  EXPECT_STREQ(to_string(CoreModel::capped), "capped");
  EXPECT_STREQ(to_string(CoreModel::similarity_flux), "flux");
}
