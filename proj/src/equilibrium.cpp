#include "bfd/equilibrium.hpp"

#include "bfd/error.hpp"
#include "bfd/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace bfd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRadialOrder = 16;
constexpr int kRadialPanels = 400;

// log of the scale-free ratio F0 / F2^(3/5) as a function of c.
double log_ratio(double c) {
  const ScaledFermiMoments m = scaled_fermi_moments(c);
  return -0.4 * c + std::log(m.f0) - 0.6 * std::log(m.f2);
}

}  // namespace

MacroscopicState macro_moments(const DistributionField& f) {
  const VelocityGrid& g = f.grid;
  double rho = 0.0;
  Vec3d mom = Vec3d::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double fi = f.values[static_cast<Eigen::Index>(i)];
    rho += fi;
    mom += fi * g.node(i);
  }
  const double dv3 = g.cell_volume();
  rho *= dv3;
  if (!(rho > 0.0)) throw Error(ErrorCode::VacuumState, "distribution has no mass");
  MacroscopicState s;
  s.rho = rho;
  s.u = mom * dv3 / rho;
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e += f.values[static_cast<Eigen::Index>(i)] * (g.node(i) - s.u).squaredNorm();
  }
  s.T = e * dv3 / (3.0 * rho);
  return s;
}

double fermi_temperature(double rho) { return 0.5 * std::pow(3.0 * rho / (4.0 * kPi), 2.0 / 3.0); }
double fermi_radius(double rho) { return std::cbrt(3.0 * rho / (4.0 * kPi)); }

ScaledFermiMoments scaled_fermi_moments(double c) {
  // e^c / (e^{r^2 + c} + 1) = 1 / (e^{r^2} + e^{-c}); tails beyond r_max are below 1e-12.
  const double r_max = std::max(10.0, std::sqrt(std::max(0.0, -c)) + 10.0);
  const double shift = std::exp(-c);
  auto occ = [shift](double r) { return 1.0 / (std::exp(r * r) + shift); };
  ScaledFermiMoments m;
  m.f0 = 4.0 * kPi * integrate_gl([&](double r) { return r * r * occ(r); }, 0.0, r_max, kRadialOrder, kRadialPanels);
  m.f2 = 4.0 * kPi *
         integrate_gl([&](double r) { return r * r * r * r * occ(r); }, 0.0, r_max, kRadialOrder, kRadialPanels);
  return m;
}

FermiDiracParams solve_fd_params(double rho, double T, const Vec3d& u) {
  if (!(rho > 0.0) || !std::isfinite(rho) || !std::isfinite(T)) {
    throw Error(ErrorCode::InvalidParameter, "rho must be positive and T finite");
  }
  const double t_f = fermi_temperature(rho);
  if (!(T > kSaturationMargin * t_f)) {
    throw Error(ErrorCode::SaturationRegime, "temperature at or below the saturation margin of T_F");
  }
  const double target = std::log(rho) - 0.6 * std::log(3.0 * rho * T);
  double lo = -60.0, hi = 700.0;  // log_ratio decreases in c
  if (!(log_ratio(lo) >= target && log_ratio(hi) <= target)) {
    throw Error(ErrorCode::NoConvergence, "implicit equilibrium equation not bracketed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_ratio(mid) > target ? lo : hi) = mid;
  }
  if (hi - lo > 1e-9 * std::max(1.0, std::abs(lo))) {
    throw Error(ErrorCode::NoConvergence, "bisection did not converge");
  }
  FermiDiracParams p;
  p.c = 0.5 * (lo + hi);
  // F0(c) = e^{-c} f0; a = (F0 / rho)^(2/3) evaluated in log form.
  const double log_f0 = std::log(scaled_fermi_moments(p.c).f0) - p.c;
  p.a = std::exp((2.0 / 3.0) * (log_f0 - std::log(rho)));
  p.u = u;
  return p;
}

DistributionField fd_equilibrium(const VelocityGrid& grid, const FermiDiracParams& params) {
  if (!(params.a > 0.0)) throw Error(ErrorCode::InvalidParameter, "equilibrium scale a must be positive");
  return DistributionField::from_function(grid, [&](const Vec3d& v) {
    return 1.0 / (std::exp(params.a * (v - params.u).squaredNorm() + params.c) + 1.0);
  });
}

SaturatedState saturated_state(const VelocityGrid& grid, double rho, const Vec3d& u) {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidParameter, "rho must be positive");
  SaturatedState s;
  s.r_F = fermi_radius(rho);
  s.T_F = fermi_temperature(rho);
  const double half = 0.5 * grid.spacing();
  s.field = DistributionField::from_function(grid, [&](const Vec3d& v) {
    const double r = (v - u).norm();
    if (std::abs(r - s.r_F) <= half) return 0.5;
    return r < s.r_F ? 1.0 : 0.0;
  });
  return s;
}

}  // namespace bfd
