#pragma once

#include "bfd/collision_operator.hpp"
#include "bfd/equilibrium.hpp"

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace bfd {

/// ||f||_{p,s} for p in {1, 2, inf} (pass std::numeric_limits<double>::infinity()).
double weighted_norm(const NodeField& values, const VelocityGrid& grid, double p, double s);
inline double weighted_norm(const DistributionField& f, double p, double s) {
  return weighted_norm(f.values, f.grid, p, s);
}

/// m_s = int f |v|^s.
double moment(const DistributionField& f, double s);

/// S_{s,p} = sum_{k=1}^{floor((p+1)/2)} binom(p,k) (m_{sk+gamma} m_{s(p-k)} + m_{sk} m_{s(p-k)+gamma}).
double moment_combination_Ssp(const DistributionField& f, double s, int p, double gamma);

/// log int f e^{a |v|^s}, accumulated with a running maximum.
double log_exp_moment(const DistributionField& f, double a, double s);
/// int f e^{a |v|^s}; switches to the log-sum form when a * max|v|^s > 500.
double exp_moment(const DistributionField& f, double a, double s);

/// S(f) = -int [f ln f + (1 - f) ln(1 - f)].
double entropy(const DistributionField& f);

/// int D(f) dv; saturated reports Gamma hitting its cap somewhere.
EntropyProduction entropy_production(const DistributionField& f, const CollisionKernel& kernel,
                                     const SphereQuadrature& quad);

/// Envelope f >= C1 exp(-C2 |v|^q) (lower) or f <= exp(-a |v|^q + c) (upper).
struct EnvelopeFit {
  double C1 = 0.0;  // lower: prefactor; upper: unused (e^c)
  double C2 = 0.0;  // lower: rate; upper: a
  double c = 0.0;   // upper offset
  double exponent = 2.0;
  int shells_used = 0;
  bool certified = false;
  std::size_t violations = 0;  // nodes in the checked region breaking the inequality
};

/// Shell minima of the positive values, least squares in (|v|^2, ln f), then C1 shrunk
/// until the inequality holds at every positive node.
///
/// By default only positive nodes are checked. Nodes with |v| <= region_radius and f = 0
/// count as violations: there the envelope must be strictly positive.
/// Throws insufficient-support below 3 shells.
EnvelopeFit fit_lower_gaussian(const DistributionField& f, double region_radius = -1.0);

/// Shell maxima, least squares, then the rate capped at a_max and c raised until
/// f <= exp(-a |v|^2 + c) holds at every node.
EnvelopeFit fit_upper_gaussian(const DistributionField& f,
                               double a_max = std::numeric_limits<double>::infinity());

/// 2 ln 3 / ln 2.
inline const double kStretchedExponent = 2.0 * std::log(3.0) / std::log(2.0);

/// Lower envelope 1 - f >= C1 exp(-C2 |v|^p) with p = 2 ln3/ln2; every node must have f < 1.
EnvelopeFit fit_upper_stretched(const DistributionField& f);

/// ||f - g||_{1,2}. Throws grid-mismatch.
double l12_distance(const DistributionField& f, const DistributionField& g);

/// Phi(r) = r + r^{1/3} + r |ln r| + ||f0 1_{|v| >= r^{-1/3}}||_{1,2}; Phi(0) = 0.
double phi_stability(double r, const DistributionField& f0);

/// Sup over a Halton sample of pairs of
/// int (|v'|^{2p} + |v'_*|^{2p}) b dsigma / (C_b (|v|^2 + |v_*|^2)^p).
double povzner_constant(const CollisionKernel& kernel, double p, int sample_count = 512);
/// The ratio above for one pair.
double povzner_ratio(const CollisionKernel& kernel, double p, const Vec3d& v, const Vec3d& v_star);

enum RecordFlag : std::uint32_t {
  kFlagGammaSaturated = 1u << 0,
  kFlagProjectionFailed = 1u << 1,
  kFlagLowerFitUnavailable = 1u << 2,
  kFlagUpperFitUnavailable = 1u << 3,
  kFlagProjectionFallback = 1u << 4,
};
std::string flags_to_string(std::uint32_t flags);

struct DiagnosticsRecord {
  double t = 0.0;
  MacroscopicState macro;
  double m2 = 0.0, m4 = 0.0, m6 = 0.0;
  double S = 0.0;
  double D = std::numeric_limits<double>::quiet_NaN();
  double min_f = 0.0, max_f = 0.0;
  double C1_lo = std::numeric_limits<double>::quiet_NaN();
  double C2_lo = std::numeric_limits<double>::quiet_NaN();
  double a_up = std::numeric_limits<double>::quiet_NaN();
  double c_up = std::numeric_limits<double>::quiet_NaN();
  double boundary_mass = 0.0;
  std::uint32_t flags = 0;
};

/// Everything except D, which needs a collision sweep (pass it in when available).
DiagnosticsRecord make_record(double t, const DistributionField& f, const EntropyProduction* production = nullptr);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& r);

}  // namespace bfd
