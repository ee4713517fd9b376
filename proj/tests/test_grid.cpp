#include "bfd/error.hpp"
#include "bfd/grid.hpp"
#include "bfd/quadrature.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace bfd;

TEST(Grid, SpacingAndNodes) {
  const VelocityGrid g = build_grid(4, 3.0);
  EXPECT_DOUBLE_EQ(g.spacing(), 2.0);
  EXPECT_DOUBLE_EQ(g.coord(0), -3.0);
  EXPECT_DOUBLE_EQ(g.coord(1), -1.0);
  EXPECT_DOUBLE_EQ(g.coord(2), 1.0);
  EXPECT_DOUBLE_EQ(g.coord(3), 3.0);
}

TEST(Grid, OddCountHasOriginNode) {
  const VelocityGrid g(5, 2.0);
  EXPECT_EQ(g.node(g.flatten(2, 2, 2)), Vec3d::Zero());
}

TEST(Grid, RejectsTooFewNodes) {
  try {
    build_grid(3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParameter);
  }
  EXPECT_THROW(build_grid(8, 0.0), Error);
}

TEST(Grid, NodesSymmetric) {
  const VelocityGrid g(7, 1.5);
  for (int i = 0; i < g.n(); ++i) EXPECT_NEAR(g.coord(i), -g.coord(g.n() - 1 - i), 1e-15);
}

TEST(Grid, FlattenRoundTrip) {
  const VelocityGrid g(6, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [x, y, z] = g.unflatten(i);
    EXPECT_EQ(g.flatten(x, y, z), i);
  }
  EXPECT_EQ(g.flatten(1, 0, 0), 1u);  // x fastest
}

TEST(Sample, NodeMidpointAndOutside) {
  const VelocityGrid g(5, 2.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  const auto f = DistributionField::from_function(g, [&](const Vec3d&) { return u(rng); });
  const std::size_t i = g.flatten(1, 2, 3), j = g.flatten(2, 2, 3);
  EXPECT_DOUBLE_EQ(sample(f, g.node(i)), f.values[i]);
  EXPECT_NEAR(sample(f, 0.5 * (g.node(i) + g.node(j))), 0.5 * (f.values[i] + f.values[j]), 1e-15);
  EXPECT_EQ(sample(f, Vec3d(4.0, 0.0, 0.0)), 0.0);
}

TEST(Sample, StaysInUnitInterval) {
  const VelocityGrid g(6, 2.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1), w(-2.5, 2.5);
  const auto f = DistributionField::from_function(g, [&](const Vec3d&) { return u(rng); });
  for (int k = 0; k < 2000; ++k) {
    const double s = sample(f, Vec3d(w(rng), w(rng), w(rng)));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Integrate, ConstantIsExact) {
  const VelocityGrid g(9, 2.0);
  const auto one = DistributionField::from_function(g, [](const Vec3d&) { return 1.0; });
  EXPECT_NEAR(integrate(one, [](const Vec3d&) { return 1.0; }), 729.0 * g.cell_volume(), 1e-12);
}

TEST(Integrate, UnitBallVolume) {
  const VelocityGrid g(64, 1.2);
  const auto ball = DistributionField::from_function(g, [](const Vec3d& v) { return v.norm() <= 1.0 ? 1.0 : 0.0; });
  const double vol = integrate(ball, [](const Vec3d&) { return 1.0; });
  EXPECT_LT(std::abs(vol - 4.0 * std::numbers::pi / 3.0) / (4.0 * std::numbers::pi / 3.0), 0.02);
}

TEST(Integrate, GaussianIntegral) {
  const VelocityGrid g(41, 6.0);
  const auto f = DistributionField::from_function(g, [](const Vec3d& v) { return std::exp(-v.squaredNorm()); });
  EXPECT_NEAR(integrate(f, [](const Vec3d&) { return 1.0; }), std::pow(std::numbers::pi, 1.5), 1e-6);
}

TEST(Integrate, Linear) {
  const VelocityGrid g(8, 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  const auto f = DistributionField::from_function(g, [&](const Vec3d&) { return u(rng); });
  const auto h = DistributionField::from_function(g, [&](const Vec3d&) { return u(rng); });
  const auto w = [](const Vec3d& v) { return 1.0 + v.squaredNorm(); };
  DistributionField mix(g, 0.3 * f.values + 0.5 * h.values);
  EXPECT_NEAR(integrate(mix, w), 0.3 * integrate(f, w) + 0.5 * integrate(h, w), 1e-12);
}

TEST(Integrate, SelfConvergenceOrderAtLeastTwo) {
  // Integrand vanishes with its first derivative on the box faces, so the node sum
  // carries no first-order boundary error.
  auto value = [](int n) {
    const VelocityGrid g(n, 1.5);
    auto bump = [](double x) { return (2.25 - x * x) * (2.25 - x * x); };
    const auto f = DistributionField::from_function(
        g, [&](const Vec3d& v) { return bump(v.x()) * bump(v.y()) * bump(v.z()) / 16.0; });
    return integrate(f, [](const Vec3d& v) { return std::cos(v.x() + 0.3 * v.y()); });
  };
  const double a = value(11), b = value(21), c = value(41);
  const double order = std::log2(std::abs(a - b) / std::abs(b - c));
  EXPECT_GE(order, 1.9);
}

TEST(Field, ValidateRejectsOutOfRange) {
  const VelocityGrid g(4, 1.0);
  DistributionField f = DistributionField::zeros(g);
  EXPECT_NO_THROW(f.validate());
  f.values[3] = 1.5;
  EXPECT_THROW(f.validate(), Error);
  EXPECT_FALSE(f.is_admissible());
}

TEST(Field, BoundaryMass) {
  const VelocityGrid g(11, 2.0);
  const auto f = DistributionField::from_function(g, [](const Vec3d& v) { return v.norm() > 1.8 ? 1.0 : 0.0; });
  EXPECT_NEAR(boundary_mass(f), integrate(f, [](const Vec3d&) { return 1.0; }), 1e-12);
}

TEST(Quadrature, GaussLegendreExactness) {
  const auto gl = gauss_legendre(6);
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 10);
  EXPECT_NEAR(s, 2.0 / 11.0, 1e-14);
}

TEST(Quadrature, SphereWeights) {
  const SphereQuadrature q(8, 16);
  EXPECT_EQ(q.size(), 128u);
  EXPECT_NEAR(q.total_weight(), 4.0 * std::numbers::pi, 1e-12);
  for (std::size_t k = 0; k < q.size(); ++k) {
    EXPECT_GT(q.weight(k), 0.0);
    EXPECT_NEAR((q.direction(k) + q.direction(q.antipode(k))).norm(), 0.0, 1e-14);
  }
  EXPECT_EQ(q.hemisphere().size(), 64u);
}
