#pragma once

#include "bfd/diagnostics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bfd {

/// Initial data. Shapes are centred at `center`.
struct InitialCondition {
  enum class Kind { Zero, Indicator, Gaussian, Equilibrium, Saturated, Snapshot };
  Kind kind = Kind::Indicator;
  double amplitude = 0.9;  // indicator / gaussian height
  double radius = 1.0;     // indicator radius
  double width = 1.0;      // gaussian rate: amplitude * exp(-width |v - center|^2)
  double rho = 1.0;        // equilibrium / saturated density
  double T = 1.0;          // equilibrium temperature
  Vec3d center = Vec3d::Zero();
  std::string path;        // snapshot file
};

DistributionField build_initial(const VelocityGrid& grid, const InitialCondition& init);

/// Fixed step when dt > 0, otherwise dt = cfl / max Q1bar capped at dt_max.
struct DtPolicy {
  double dt = 0.0;
  double cfl = 0.5;
  double dt_max = 0.1;  // also the step taken when Q1bar vanishes
};

double choose_dt(const NodeField& total_freq, const DtPolicy& policy);
double choose_dt(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad,
                 const DtPolicy& policy);

struct SimulationConfig {
  int n = 16;
  double radius = 6.0;
  CollisionKernel kernel;
  std::string angular_table;  // empty: constant law
  int n_theta = 8;
  int n_phi = 16;
  InitialCondition init;
  double t_end = 1.0;
  DtPolicy dt_policy;
  bool projection = true;
  int threads = 0;
  std::string output_dir = "out";
  int output_every = 10;  // steps between diagnostics records
  bool write_snapshots = true;
  std::uint64_t seed = 20240611;

  /// Throws validation-error naming the offending key.
  void validate() const;
};

struct StepOptions {
  bool projection = true;
  int max_repairs = 30;
  double conservation_tol = 1e-13;
};

struct StepResult {
  DistributionField field;
  double pre_min = 0.0;  // bounds of the exponential update before projection
  double pre_max = 0.0;
  double defect = 0.0;   // largest relative invariant drift of the accepted increment
  int repairs = 0;
  std::uint32_t flags = 0;
};

/// f+ = f e^{-L dt} + (1 - e^{-L dt}) g / L with g = Q1(f, f, 1-f), L = Q1bar frozen at f,
/// followed by the conservative repair of the increment.
///
/// The repair tilts f+ to sigma(logit f+ + lambda . (1, v, |v|^2)) with lambda found by at most
/// max_repairs damped Newton steps; the Jacobian is the f+(1-f+)-weighted Gram matrix. Nodes
/// at 0 or 1 are left alone and no interior node reaches a bound. Whatever defect is left
/// goes through up to five clamped f(1-f)-weighted projections, with the unweighted
/// projection (flagged) when the weighted Gram matrix is singular.
StepResult step_from_rates(const DistributionField& f, const CollisionRates& rates, double dt,
                           const StepOptions& options = {});
StepResult step_exponential(const DistributionField& f, double dt, const CollisionKernel& kernel,
                            const SphereQuadrature& quad, const StepOptions& options = {});

/// Relative drift of the five invariants between two fields: mass by rho, momentum by
/// sqrt(rho * E), energy by E (E = int |v|^2 f of the reference).
Eigen::Matrix<double, 5, 1> relative_invariant_drift(const DistributionField& reference,
                                                     const DistributionField& current);

struct StepRow {
  double t = 0.0;
  double dt = 0.0;
  double min_f = 0.0, max_f = 0.0;
  double pre_min = 0.0, pre_max = 0.0;
  double S = 0.0;
  Eigen::Matrix<double, 5, 1> invariants = Eigen::Matrix<double, 5, 1>::Zero();
  double defect = 0.0;
  std::uint32_t flags = 0;
};

struct Trajectory {
  std::vector<double> times;  // snapshot times, strictly increasing
  std::vector<DistributionField> snapshots;
  std::vector<DiagnosticsRecord> records;  // one per snapshot
  std::vector<StepRow> steps;              // row 0 is the initial state
};

/// Integrates to t_end. Records (with D) at t = 0, every `output_every` steps and at t_end.
Trajectory run_simulation(const SimulationConfig& config);
/// Same, from an explicit initial field.
Trajectory run_simulation(const SimulationConfig& config, const DistributionField& f0);

/// Kernel and sphere quadrature described by a config (loads the angular table if any).
CollisionKernel resolve_kernel(const SimulationConfig& config);

}  // namespace bfd
