#include "bfd/error.hpp"
#include "bfd/integrator.hpp"
#include "bfd/parallel.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bfd;

namespace {

DistributionField random_field(const VelocityGrid& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  return DistributionField::from_function(g, [&](const Vec3d& v) {
    return u(rng) * std::exp(-0.3 * v.squaredNorm());
  });
}

SimulationConfig small_config() {
  SimulationConfig c;
  c.n = 8;
  c.radius = 2.5;
  c.n_theta = 2;
  c.n_phi = 4;
  c.t_end = 0.05;
  c.dt_policy.dt = 0.01;
  c.output_every = 2;
  return c;
}

const SphereQuadrature kQuad(2, 4);

}  // namespace

TEST(Step, ZeroDtIsIdentity) {
  const VelocityGrid g(8, 2.5);
  const auto f = random_field(g, 1);
  const auto r = step_exponential(f, 0.0, CollisionKernel{}, kQuad);
  EXPECT_EQ(r.field.values, f.values);
}

TEST(Step, ZeroFieldStaysZero) {
  const VelocityGrid g(8, 2.5);
  const auto r = step_exponential(DistributionField::zeros(g), 0.3, CollisionKernel{}, kQuad);
  EXPECT_EQ(r.field.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Step, RelaxationWithoutRoundingClampForAnyDt) {
  // Raw update recomputed here: both f+ and 1 - f+ are nonnegative combinations.
  const VelocityGrid g(8, 2.5);
  const CollisionKernel k;
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto f = random_field(g, seed);
    const auto rates = eval_rates(f, k, kQuad);
    for (double dt : {1e-9, 1e-3, 0.1, 10.0, 1e4}) {
      for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double L = rates.total_freq[i];
        const double e = std::exp(-L * dt);
        const double raw = f.values[i] * e + (L > 0 ? (1 - e) / L : dt) * rates.gain[i];
        ASSERT_GE(raw, -1e-15);
        ASSERT_LE(raw, 1.0 + 1e-15);
      }
      const auto r = step_from_rates(f, rates, dt);
      EXPECT_GE(r.pre_min, 0.0);
      EXPECT_LE(r.pre_max, 1.0);
      EXPECT_GE(r.field.values.minCoeff(), 0.0);
      EXPECT_LE(r.field.values.maxCoeff(), 1.0);
    }
  }
}

TEST(Step, ConservationAfterProjection) {
  const VelocityGrid g(8, 2.5);
  const auto f = random_field(g, 5, 0.05, 0.95);
  for (double dt : {1e-3, 0.05, 0.5}) {
    const auto r = step_exponential(f, dt, CollisionKernel{}, kQuad);
    EXPECT_LT(relative_invariant_drift(f, r.field).maxCoeff(), 1e-10) << dt;
    EXPECT_FALSE(r.flags & kFlagProjectionFailed);
    StepOptions off;
    off.projection = false;
    const auto raw = step_exponential(f, dt, CollisionKernel{}, kQuad, off);
    EXPECT_GT(relative_invariant_drift(f, raw.field).maxCoeff(), 1e-8) << dt;
  }
}

TEST(Step, RepairKeepsTailsStrictlyPositive) {
  // Gaussian tails reach 1e-14 at the corners; a linear repair would push them below zero.
  const VelocityGrid g(10, 3.0);
  const auto f = DistributionField::from_function(
      g, [](const Vec3d& v) { return 0.9 * std::exp(-1.2 * (v - Vec3d(0.4, 0.0, 0.0)).squaredNorm()); });
  DistributionField cur = f;
  for (int k = 0; k < 5; ++k) {
    const auto r = step_exponential(cur, 0.05, CollisionKernel{}, kQuad);
    EXPECT_FALSE(r.flags & (kFlagProjectionFailed | kFlagProjectionFallback));
    cur = r.field;
  }
  EXPECT_GT(cur.values.minCoeff(), 0.0);
  EXPECT_LT(cur.values.maxCoeff(), 1.0);
  EXPECT_LT(relative_invariant_drift(f, cur).maxCoeff(), 1e-12);
  EXPECT_TRUE(std::isfinite(entropy_production(cur, CollisionKernel{}, kQuad).total));
  EXPECT_FALSE(entropy_production(cur, CollisionKernel{}, kQuad).saturated);
}

TEST(Step, FirstOrderConsistency) {
  const VelocityGrid g(8, 2.5);
  const CollisionKernel k;
  const auto f = random_field(g, 6, 0.1, 0.9);
  const NodeField q = eval_QFD(f, k, kQuad);
  StepOptions off;
  off.projection = false;
  std::vector<double> err;
  for (double dt : {0.004, 0.002, 0.001}) {
    const auto r = step_exponential(f, dt, k, kQuad, off);
    err.push_back(((r.field.values - f.values) / dt - q).cwiseAbs().maxCoeff());
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 0.95);
  EXPECT_GE(std::log2(err[1] / err[2]), 0.95);
}

TEST(Step, ComplementSymmetry) {
  // The hole density h = 1 - f under the swapped scheme (exterior 1) evolves to 1 - f+.
  const VelocityGrid g(8, 2.5);
  const CollisionKernel k;
  const auto f = random_field(g, 7);
  const DistributionField h(g, NodeField::Ones(f.values.size()) - f.values);
  const Operand hf{h.values, 1.0}, ff{f.values, 0.0};
  CollisionRates rh;
  rh.gain = eval_Q1(g, hf, hf, ff, k, kQuad);
  rh.total_freq = rh.gain + eval_Q1(g, ff, ff, hf, k, kQuad);
  StepOptions off;
  off.projection = false;
  for (double dt : {0.01, 0.7}) {
    const auto fp = step_exponential(f, dt, k, kQuad, off);
    const auto hp = step_from_rates(h, rh, dt, off);
    EXPECT_LT((hp.field.values - (NodeField::Ones(f.values.size()) - fp.field.values)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Step, EquilibriumMovesLessThanResidualTimesDt) {
  const VelocityGrid g(10, 4.0);
  const CollisionKernel k;
  const auto f = fd_equilibrium(g, solve_fd_params(1.0, 1.0));
  const double residual = eval_QFD(f, k, kQuad).cwiseAbs().maxCoeff();
  StepOptions off;
  off.projection = false;
  for (double dt : {1e-3, 1e-2}) {
    const auto r = step_exponential(f, dt, k, kQuad, off);
    EXPECT_LE((r.field.values - f.values).cwiseAbs().maxCoeff(), residual * dt * (1 + 1e-12));
  }
}

TEST(ChooseDt, Policies) {
  const VelocityGrid g(8, 2.5);
  const CollisionKernel k;
  DtPolicy adaptive;
  EXPECT_EQ(choose_dt(DistributionField::zeros(g), k, kQuad, adaptive), adaptive.dt_max);
  DtPolicy fixed;
  fixed.dt = 0.0123;
  EXPECT_EQ(choose_dt(random_field(g, 8), k, kQuad, fixed), 0.0123);
  adaptive.dt_max = 1e9;
  const NodeField freq = eval_Qbar1(random_field(g, 9), k, kQuad);
  EXPECT_DOUBLE_EQ(choose_dt(NodeField(2.0 * freq), adaptive), 0.5 * choose_dt(freq, adaptive));
  EXPECT_DOUBLE_EQ(choose_dt(freq, adaptive), adaptive.cfl / freq.maxCoeff());
}

TEST(Run, ZeroHorizonGivesOneSnapshot) {
  auto c = small_config();
  c.t_end = 0.0;
  const auto t = run_simulation(c);
  ASSERT_EQ(t.snapshots.size(), 1u);
  EXPECT_EQ(t.times[0], 0.0);
  EXPECT_EQ(t.steps.size(), 1u);
}

TEST(Run, RecordsCadenceAndInvariants) {
  const auto c = small_config();
  const auto t = run_simulation(c);
  // Steps at 0.01 .. 0.05; records at 0, after steps 2 and 4, and at t_end.
  ASSERT_EQ(t.steps.size(), 6u);
  ASSERT_EQ(t.times.size(), 4u);
  EXPECT_NEAR(t.times[1], 0.02, 1e-15);
  EXPECT_NEAR(t.times[2], 0.04, 1e-15);
  EXPECT_EQ(t.times.back(), 0.05);
  for (std::size_t i = 1; i < t.times.size(); ++i) EXPECT_GT(t.times[i], t.times[i - 1]);
  ASSERT_EQ(t.records.size(), t.times.size());
  for (const auto& r : t.records) EXPECT_FALSE(std::isnan(r.D));
  for (const auto& s : t.snapshots) EXPECT_NO_THROW(s.validate());
  for (const auto& row : t.steps) {
    EXPECT_GE(row.min_f, 0.0);
    EXPECT_LE(row.max_f, 1.0);
  }
  const auto drift = relative_invariant_drift(t.snapshots.front(), t.snapshots.back());
  EXPECT_LT(drift.maxCoeff(), 1e-9);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  c.threads = 1;
  const auto a = run_simulation(c);
  c.threads = 3;
  const auto b = run_simulation(c);
  set_thread_count(0);
  EXPECT_EQ(a.snapshots.back().values, b.snapshots.back().values);
  EXPECT_EQ(a.records.back().D, b.records.back().D);
}

TEST(Run, IndicatorFillsVacuum) {
  auto c = small_config();
  c.n = 9;
  c.radius = 2.4;
  c.init.radius = 0.7;  // the origin and its six neighbours at distance 0.6
  c.t_end = 1.0;
  c.dt_policy.dt = 0.0;
  c.output_every = 1000;
  const auto t = run_simulation(c);
  const auto& f = t.snapshots.back();
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    if (f.grid.node(i).norm() <= 1.2 + 1e-9) EXPECT_GT(f.values[i], 0.0);
  }
}

TEST(Run, InitialConditions) {
  const VelocityGrid g(9, 2.0);
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Gaussian;
  ic.amplitude = 0.5;
  ic.width = 1.0;
  EXPECT_DOUBLE_EQ(build_initial(g, ic).values.maxCoeff(), 0.5);
  ic.kind = InitialCondition::Kind::Saturated;
  ic.rho = 1.0;
  EXPECT_EQ(build_initial(g, ic).values.maxCoeff(), 1.0);
  ic.kind = InitialCondition::Kind::Snapshot;
  ic.path = "/nonexistent/bfd.snap";
  EXPECT_THROW(build_initial(g, ic), Error);
}

TEST(Config, ValidationNamesKey) {
  auto c = small_config();
  c.kernel.gamma = 3.0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    EXPECT_NE(std::string(e.what()).find("kernel.gamma"), std::string::npos);
  }
  c = small_config();
  c.dt_policy.cfl = 1.5;
  EXPECT_THROW(c.validate(), Error);
}
