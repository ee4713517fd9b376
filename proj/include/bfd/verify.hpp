#pragma once

#include "bfd/config.hpp"
#include "bfd/integrator.hpp"

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace bfd {

/// One measured quantity against its threshold. Informative checks are reported but
/// never fail a suite; skipped checks carry a note and a NaN measurement.
struct CheckResult {
  std::string name;
  double measured = std::numeric_limits<double>::quiet_NaN();
  std::string relation;  // "<=", "<", ">=", ">"
  double threshold = 0.0;
  bool pass = false;
  bool informative = false;
  bool skipped = false;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::string fingerprint;
  std::vector<CheckResult> checks;
  double runtime_seconds = 0.0;  // wall clock; kept out of the written report

  CheckResult& add(const std::string& name, double measured, const std::string& relation, double threshold,
                   bool informative = false, const std::string& note = "");
  CheckResult& skip(const std::string& name, const std::string& note);
  /// True when no non-informative check failed.
  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  void append(const VerificationReport& other);

  /// "key = value" lines: suite, fingerprint, verdict, then one block per check.
  void write_kv(std::ostream& os) const;
  /// suite,check,measured,relation,threshold,pass,informative,note
  void write_csv(std::ostream& os, bool header = true) const;
};

/// Relative drift of mass, momentum and energy between the first and every later
/// snapshot, against `tolerance`. Without projection the checks are informative.
VerificationReport check_conservation(const Trajectory& traj, bool projection = true, double tolerance = 1e-8);

/// Every step (before and after the repair) lies in [0, 1].
VerificationReport check_pauli_bounds(const Trajectory& traj);

/// Per-step entropy monotonicity within -1e-8 max(1, S) and the entropy identity
/// |S(t) - S(t0) - int_t0^t D| <= 5% of max(|S(t) - S(t0)|, |int D|) by the trapezoid rule
/// over the records. t0 is the first record after the last one flagged gamma_saturated;
/// the identity is skipped when no such window exists.
VerificationReport check_h_theorem(const Trajectory& traj);

/// sup over record times t in [t_min, 1] of m_s(t) min(t^{(s-2)/gamma}, 1), per refinement
/// level; finite everywhere and successive levels within a factor 2.
VerificationReport check_moment_creation(const std::vector<Trajectory>& levels, double s, double gamma,
                                         double t_min = 0.05);

/// Fields used by the moment-inequality battery: seeded uniform noise under random
/// Gaussian envelopes, values in [0, 1].
std::vector<DistributionField> random_admissible_fields(const VelocityGrid& grid, int count, std::uint64_t seed);

/// Inequality for the classical operator:
/// int Q_c(f, f) |v|^{sp} <= C_b (2 w S_{s,p} - K1 m_{sp+gamma} + K2 m_{sp}) + eps_quad,
/// w the Povzner constant at sp/2, K1 = 2^{2-gamma} (1 - w) m_0, K2 = 2 m_gamma.
/// eps_quad = 1e-12 times the sum of the magnitudes of the gain and loss moments.
struct MomentInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double eps_quad = 0.0;
  double varpi = 0.0;
  double K1 = 0.0, K2 = 0.0;
};
MomentInequality moment_ode_terms(const DistributionField& f, const CollisionKernel& kernel,
                                  const SphereQuadrature& quad, double s, int p, double varpi);
VerificationReport check_moment_ode_bound(const std::vector<DistributionField>& fields, const CollisionKernel& kernel,
                                          const SphereQuadrature& quad, double s, int p);

/// E(t) = int f(t) e^{a min(t, 1) |v|^gamma} over the records; max E / min E <= 10.
VerificationReport check_exponential_moment(const Trajectory& traj, double a, double gamma);

/// (i) Lower Gaussian certificate at the last record with C1 > 0 on |v| <= region_fraction R;
/// (ii) Q1(f0, f0, 1 - f0) > 0 on the annulus delta < |v| <= sqrt(2) delta (1 - eta).
VerificationReport check_lower_bound_creation(const Trajectory& traj, const CollisionKernel& kernel,
                                              const SphereQuadrature& quad, double delta, double eta = 0.1,
                                              double region_fraction = 0.8);

/// At the records nearest to `times`: the Gaussian upper certificate with rate in (0, a0],
/// the stretched-exponential certificate for 1 - f, and sup (1 + |v|)^{s'} f staying within
/// a factor 10 of its initial value (constant angular laws only).
VerificationReport check_upper_envelopes(const Trajectory& traj, const CollisionKernel& kernel, double a0,
                                         const std::vector<double>& times, double s_prime = 4.0);

/// Perturbed pairs (f0, g0 = clamp(f0 + r psi)), psi a seeded nonnegative profile scaled
/// to ||psi||_{1,2} = 1, one run per r plus the reference run.
struct StabilityRuns {
  std::vector<double> r_values;
  std::vector<double> times;
  std::vector<std::vector<double>> distances;  // [r][record]
};
StabilityRuns run_stability(const SimulationConfig& config, const std::vector<double>& r_values);
/// Distances finite, strictly decreasing along the r ladder at the final time and, when
/// `envelope` is set, fitted K r e^{K' t} envelopes of the two smallest r agreeing within
/// a factor 2 in K and in the growth e^{K' t_end}.
VerificationReport check_stability(const StabilityRuns& runs, bool envelope);

/// sup_t ||f_n - f_inf||_{1,2} along a cap ladder, plus an exact-zero check for a cap
/// above the largest relative speed on the grid.
struct TruncationRuns {
  std::vector<double> caps;
  std::vector<double> sup_distance;
  double inactive_cap = 0.0;
  double inactive_distance = 0.0;
};
TruncationRuns run_kernel_truncation(const SimulationConfig& config, const std::vector<double>& caps);
VerificationReport check_kernel_truncation(const TruncationRuns& runs);

/// Equilibrium fixed point: sup-node drift over `steps` steps on the config grid, and
/// max |Q_FD(f_eq)| at `coarse_n` against the config grid (ratio <= 1/2).
VerificationReport check_equilibrium(const SimulationConfig& config, int steps, int coarse_n);

/// Povzner constants: w_1 = 1 within 1e-3 and w_2 < w_1.
VerificationReport check_povzner(const CollisionKernel& kernel);

/// Carleman gain against the sigma-quadrature gain on e^{-|v|^2} / 2 data:
/// relative L1 gap at each size, the last below 5%, and decreasing along the ladder.
VerificationReport check_carleman(const std::vector<int>& sizes, double radius, const CollisionKernel& kernel,
                                  const SphereQuadrature& quad);

/// Suite names accepted by run_suite, in `verify all` order.
const std::vector<std::string>& suite_names();
/// Runs one named suite (or "all") from a base configuration.
VerificationReport run_suite(const std::string& name, const SimulationConfig& config);

}  // namespace bfd
