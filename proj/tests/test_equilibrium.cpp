#include "bfd/collision_operator.hpp"
#include "bfd/diagnostics.hpp"
#include "bfd/equilibrium.hpp"
#include "bfd/error.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace bfd;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent midpoint oracle in r for int 4 pi r^k / (exp(a r^2 + c) + 1) dr.
double radial_oracle(double a, double c, int k) {
  const int m = 200000;
  const double rmax = std::sqrt((std::max(0.0, -c) + 40.0) / a);
  const double h = rmax / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = (i + 0.5) * h;
    s += std::pow(r, k + 2) / (std::exp(a * r * r + c) + 1.0);
  }
  return 4 * kPi * s * h;
}
}  // namespace

TEST(Macro, IndicatorBall) {
  const VelocityGrid g(81, 1.6);
  const auto f = DistributionField::from_function(g, [](const Vec3d& v) { return v.norm() <= 1.0 ? 1.0 : 0.0; });
  const auto m = macro_moments(f);
  EXPECT_NEAR(m.rho, 4 * kPi / 3, 0.02 * 4 * kPi / 3);
  EXPECT_NEAR(m.u.norm(), 0.0, 1e-12);
  EXPECT_NEAR(m.T, 0.2, 0.02 * 0.2);
}

TEST(Macro, TranslationCovariance) {
  const VelocityGrid g(41, 6.0);
  const Vec3d u0(0.6, -0.3, 0.9);  // multiples of the spacing keep the lattice aligned
  const auto f = DistributionField::from_function(g, [](const Vec3d& v) { return 0.5 * std::exp(-v.squaredNorm()); });
  const auto h = DistributionField::from_function(
      g, [&](const Vec3d& v) { return 0.5 * std::exp(-(v - u0).squaredNorm()); });
  const auto a = macro_moments(f), b = macro_moments(h);
  EXPECT_NEAR((b.u - u0).norm(), 0.0, 1e-9);
  EXPECT_NEAR(b.T, a.T, 1e-9);
  EXPECT_NEAR(b.rho, a.rho, 1e-9);
}

TEST(Macro, VacuumThrows) {
  const VelocityGrid g(8, 2.0);
  try {
    macro_moments(DistributionField::zeros(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VacuumState);
  }
}

TEST(FermiConstants, UnitBallDensity) {
  EXPECT_NEAR(fermi_radius(4 * kPi / 3), 1.0, 1e-14);
  EXPECT_NEAR(fermi_temperature(4 * kPi / 3), 0.5, 1e-14);
}

TEST(ScaledMoments, MatchRadialOracle) {
  for (double c : {-20.0, -3.0, 0.0, 2.5, 12.0}) {
    const auto m = scaled_fermi_moments(c);
    // Scaled by e^c: int 1/(e^{r^2} + e^{-c}).
    EXPECT_NEAR(m.f0, std::exp(c) * radial_oracle(1.0, c, 0), 1e-8 * m.f0) << c;
    EXPECT_NEAR(m.f2, std::exp(c) * radial_oracle(1.0, c, 2), 1e-8 * m.f2) << c;
  }
}

TEST(SolveFd, ReproducesTargetsExactly) {
  for (const auto& [rho, T] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {0.5, 2.0}, {3.0, 0.6}, {1.0, 0.3}}) {
    const auto p = solve_fd_params(rho, T);
    const double r0 = radial_oracle(p.a, p.c, 0);
    const double r2 = radial_oracle(p.a, p.c, 2);
    EXPECT_NEAR(r0, rho, 1e-6 * rho);
    EXPECT_NEAR(r2 / (3 * r0), T, 1e-6 * T);
  }
}

TEST(SolveFd, ClassicalLimit) {
  const double rho = 1e-3, T = 2.0;
  const auto p = solve_fd_params(rho, T);
  ASSERT_GE(p.c, 10.0);
  EXPECT_NEAR(std::exp(-p.c) * std::pow(kPi / p.a, 1.5), rho, 0.01 * rho);
  EXPECT_NEAR(1.0 / (2 * p.a), T, 0.01 * T);
}

TEST(SolveFd, RoundTripOnGrid) {
  const VelocityGrid g(32, 7.0);
  const double rho = 1.0, T = 1.0;
  const Vec3d u(0.2, 0.0, -0.1);
  const auto f = fd_equilibrium(g, solve_fd_params(rho, T, u));
  const auto m = macro_moments(f);
  EXPECT_NEAR(m.rho, rho, 1e-4 * rho);
  EXPECT_NEAR(m.T, T, 1e-4 * T);
  EXPECT_NEAR((m.u - u).norm(), 0.0, 1e-4);
}

TEST(SolveFd, SaturationRegime) {
  const double rho = 4 * kPi / 3;
  for (double T : {0.4, 0.5, 0.505}) {
    try {
      solve_fd_params(rho, T);
      FAIL() << T;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SaturationRegime);
    }
  }
  EXPECT_NO_THROW(solve_fd_params(rho, 0.52));
}

TEST(SolveFd, ScaleConsistency) {
  // Doubling rho with T scaled so the ratio rho / (rho T)^{3/5} is fixed keeps c and
  // multiplies a by 2^{-2/3}.
  const double rho = 1.3, T = 0.9;
  const auto p = solve_fd_params(rho, T);
  const double T2 = T * std::pow(2.0, 2.0 / 3.0);
  const auto q = solve_fd_params(2 * rho, T2);
  EXPECT_NEAR(q.c, p.c, 1e-6 * std::max(1.0, std::abs(p.c)));
  EXPECT_NEAR(q.a, p.a * std::pow(2.0, -2.0 / 3.0), 1e-6 * p.a);
}

TEST(SolveFd, RejectsBadInput) {
  EXPECT_THROW(solve_fd_params(-1.0, 1.0), Error);
  EXPECT_THROW(solve_fd_params(1.0, 0.0), Error);
}

TEST(FdEquilibrium, Examples) {
  const VelocityGrid g(9, 2.0);
  const auto half = fd_equilibrium(g, FermiDiracParams{1.0, 0.0, Vec3d::Zero()});
  EXPECT_DOUBLE_EQ(sample(half, Vec3d::Zero()), 0.5);
  const auto dilute = fd_equilibrium(g, FermiDiracParams{1.0, 10.0, Vec3d::Zero()});
  EXPECT_LT(dilute.values.maxCoeff(), 1e-4);
  EXPECT_DOUBLE_EQ(dilute.values.maxCoeff(), 1.0 / (std::exp(10.0) + 1.0));
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < g.size(); ++b) {
      if (g.node(a).norm() < g.node(b).norm() - 1e-12) ASSERT_GT(half.values[a], half.values[b]);
    }
  }
  EXPECT_GT(half.values.minCoeff(), 0.0);
  EXPECT_LT(half.values.maxCoeff(), 1.0);
}

TEST(Saturated, ConstantsAndShell) {
  const VelocityGrid g(97, 1.5);
  const auto s = saturated_state(g, 4 * kPi / 3);
  EXPECT_NEAR(s.r_F, 1.0, 1e-14);
  EXPECT_NEAR(s.T_F, 0.5, 1e-14);
  const double dv = g.spacing();
  for (std::size_t a = 0; a < g.size(); ++a) {
    const double r = g.node(a).norm();
    const double want = std::abs(r - 1.0) <= 0.5 * dv ? 0.5 : (r < 1.0 ? 1.0 : 0.0);
    ASSERT_EQ(s.field.values[a], want);
  }
  EXPECT_NEAR(macro_moments(s.field).rho, 4 * kPi / 3, 0.02 * 4 * kPi / 3);
}

TEST(Saturated, EntropyVanishesUnderRefinement) {
  // Only the shell band (width dv, value 1/2) contributes: S ~ 4 pi r_F^2 dv ln 2.
  double prev = 1e300;
  for (int n : {17, 33, 65, 129}) {
    const VelocityGrid g(n, 1.5);
    const double S = entropy(saturated_state(g, 4 * kPi / 3).field);
    EXPECT_GE(S, 0.0);
    EXPECT_LT(S, prev);
    EXPECT_NEAR(S, 4 * kPi * g.spacing() * std::log(2.0), 0.1 * 4 * kPi * g.spacing() * std::log(2.0));
    prev = S;
  }
}

TEST(FdEquilibrium, OperatorResidualShrinksUnderRefinement) {
  CollisionKernel k;
  const auto p = solve_fd_params(1.0, 1.0);
  double prev = 1e300;
  for (const auto& [n, nt, np] : std::vector<std::tuple<int, int, int>>{{12, 2, 4}, {16, 3, 4}, {24, 3, 6}}) {
    const VelocityGrid g(n, 4.0);
    const auto f = fd_equilibrium(g, p);
    const double r = eval_QFD(f, k, SphereQuadrature(nt, np)).cwiseAbs().maxCoeff();
    EXPECT_LT(r, prev) << n;
    prev = r;
  }
}
