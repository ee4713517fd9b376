#pragma once

#include "bfd/grid.hpp"
#include "bfd/kernel.hpp"
#include "bfd/quadrature.hpp"

namespace bfd {

/// A factor in the trilinear collision sums: node values plus the value taken
/// outside the box. Occupations use 0 outside (vacuum), their complements 1.
struct Operand {
  NodeField values;
  double exterior = 0.0;

  static Operand occupation(const DistributionField& f) { return {f.values, 0.0}; }
  static Operand complement(const DistributionField& f) {
    return {NodeField::Ones(f.values.size()) - f.values, 1.0};
  }
  static Operand constant(const VelocityGrid& g, double c) {
    return {NodeField::Constant(static_cast<Eigen::Index>(g.size()), c), c};
  }
};

/// Per-node rates of the Q1 splitting: Q_FD = gain - f * total_freq.
struct CollisionRates {
  NodeField gain;        // Q1(f, f, 1-f)
  NodeField total_freq;  // Q1bar = Q1(f, f, 1-f) + Q1(1-f, 1-f, f)
  NodeField q_fd;
};

/// Value substituted for Gamma(a, b) = +infinity (exactly one argument zero).
inline constexpr double kGammaCap = 1e6;

/// Gamma(a, b) = (a - b) ln(a/b); capped at kGammaCap when exactly one argument is 0.
inline double entropy_gamma(double a, double b, bool& saturated) noexcept {
  if (a > 0.0 && b > 0.0) return (a - b) * std::log(a / b);
  if (a == b) return 0.0;
  saturated = true;
  return kGammaCap;
}

struct EntropyProduction {
  NodeField density;  // D(f)(v) per node
  double total = 0.0;  // int D(f)(v) dv
  bool saturated = false;
};

/// Collision rates and, optionally, the entropy production, from one fused sweep.
///
/// Every unordered node pair {v, v*} is visited once: the post-collision
/// velocities of (v, v*, sigma) and (v*, v, sigma) coincide, and sigma and -sigma
/// give the same products f' f'_*. Block-local accumulation followed by an ordered
/// pairwise reduction makes the result independent of the thread count.
struct CollisionSweep {
  CollisionRates rates;
  EntropyProduction production;
};
CollisionSweep eval_collision_sweep(const DistributionField& f, const CollisionKernel& kernel,
                                    const SphereQuadrature& quad, bool with_production);

CollisionRates eval_rates(const DistributionField& f, const CollisionKernel& kernel,
                          const SphereQuadrature& quad);

NodeField eval_QFD(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad);

/// Q1(f1, f2, f3)(v) = sum_{v*, sigma} B f1(v') f2(v*') f3(v*) dv^3 w_sigma.
NodeField eval_Q1(const VelocityGrid& grid, const Operand& f1, const Operand& f2, const Operand& f3,
                  const CollisionKernel& kernel, const SphereQuadrature& quad);

NodeField eval_Qbar1(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad);

/// Q_FD = Q_FD^+ - f L_FD.
struct GainLossSplit {
  NodeField gain;  // Q_FD^+(f, f, 1-f, 1-f)
  NodeField loss_freq;  // L_FD(f, 1-f, 1-f)
};
GainLossSplit eval_gain_loss_split(const DistributionField& f, const CollisionKernel& kernel,
                                   const SphereQuadrature& quad);

/// Classical gain Q_c^+(f, g) by sigma-quadrature.
NodeField eval_Qc_gain_direct(const DistributionField& f, const DistributionField& g,
                              const CollisionKernel& kernel, const SphereQuadrature& quad);
/// Classical loss Q_c^-(f, g)(v) = f(v) sum_{v*, sigma} B g(v*).
NodeField eval_Qc_loss(const DistributionField& f, const DistributionField& g, const CollisionKernel& kernel,
                       const SphereQuadrature& quad);

/// Classical gain through the Carleman representation: an outer sum over nodes v'
/// and an inner midpoint sum over the plane through v orthogonal to v' - v.
///
/// The plane lattice has spacing dv, is centred at the plane point closest to the
/// origin and is clipped to the box. The node v' = v is skipped (zero-measure point).
NodeField eval_Qc_gain_carleman(const DistributionField& f, const DistributionField& g,
                                const CollisionKernel& kernel);

/// Orthonormal basis (e1, e2) of the plane orthogonal to the unit vector n. The axis
/// where |n| is smallest seeds the cross product.
std::pair<Vec3d, Vec3d> plane_basis(const Vec3d& n);

/// q + sum_k lambda_k psi_k, psi in {1, v_x, v_y, v_z, |v|^2}, with the discrete
/// moments of the result zero. With `weights`, the correction is weights * sum lambda psi
/// (minimal in the weighted norm); nodes of zero weight are left untouched.
///
/// Throws singular-gram when the invariants are not resolvable on the (weighted) grid.
NodeField conservative_projection(const NodeField& q, const VelocityGrid& grid,
                                  const NodeField* weights = nullptr);

/// Discrete moments int q psi_k dv for the five collision invariants.
Eigen::Matrix<double, 5, 1> invariant_moments(const NodeField& q, const VelocityGrid& grid);

}  // namespace bfd
