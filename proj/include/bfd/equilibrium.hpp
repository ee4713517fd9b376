#pragma once

#include "bfd/grid.hpp"

namespace bfd {

struct MacroscopicState {
  double rho = 0.0;
  Vec3d u = Vec3d::Zero();
  double T = 0.0;
};

/// rho = int f, u = int v f / rho, T = int |v - u|^2 f / (3 rho). Throws vacuum-state if rho <= 0.
MacroscopicState macro_moments(const DistributionField& f);

/// Parameters of 1 / (exp(a |v - u|^2 + c) + 1).
struct FermiDiracParams {
  double a = 1.0;
  double c = 0.0;
  Vec3d u = Vec3d::Zero();
};

/// T_F = (1/2) (3 rho / 4 pi)^(2/3).
double fermi_temperature(double rho);
/// r_F = (3 rho / 4 pi)^(1/3).
double fermi_radius(double rho);

/// Smallest admissible temperature is kSaturationMargin * T_F.
inline constexpr double kSaturationMargin = 1.02;

/// Solves the implicit (a, c) equations in three velocity dimensions.
///
/// The scale-free ratio rho / (3 rho T)^(3/5) fixes c (bisection on its logarithm); a then
/// follows from a = (F0(c) / rho)^(2/3), with F0, F2 the zeroth and second moments of
/// 1/(exp(|v|^2 + c) + 1) by composite radial Gauss-Legendre quadrature.
/// Throws saturation-regime when T <= 1.02 T_F and no-convergence if the bracket fails.
FermiDiracParams solve_fd_params(double rho, double T, const Vec3d& u = Vec3d::Zero());

/// Radial moments int |v|^k / (exp(|v|^2 + c) + 1) dv for k = 0, 2, scaled by e^c.
struct ScaledFermiMoments {
  double f0 = 0.0;
  double f2 = 0.0;
};
ScaledFermiMoments scaled_fermi_moments(double c);

DistributionField fd_equilibrium(const VelocityGrid& grid, const FermiDiracParams& params);

struct SaturatedState {
  DistributionField field;
  double T_F = 0.0;
  double r_F = 0.0;
};

/// Ball of radius r_F about u: 1 inside, 1/2 on nodes within dv/2 of the sphere, 0 outside.
SaturatedState saturated_state(const VelocityGrid& grid, double rho, const Vec3d& u = Vec3d::Zero());

}  // namespace bfd
