#include "bfd/integrator.hpp"

#include "bfd/error.hpp"
#include "bfd/parallel.hpp"
#include "bfd/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bfd {

namespace {

// (1 - e^{-L dt}) / L, continuous at L = 0.
double relaxation_factor(double L, double dt) {
  const double x = L * dt;
  if (x < 1e-8) return dt * (1.0 - 0.5 * x + x * x / 6.0);
  return -std::expm1(-x) / L;
}

double max_abs(const Eigen::Matrix<double, 5, 1>& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

DistributionField build_initial(const VelocityGrid& grid, const InitialCondition& init) {
  using Kind = InitialCondition::Kind;
  switch (init.kind) {
    case Kind::Zero:
      return DistributionField::zeros(grid);
    case Kind::Indicator:
      return DistributionField::from_function(grid, [&](const Vec3d& v) {
        return (v - init.center).norm() <= init.radius ? init.amplitude : 0.0;
      });
    case Kind::Gaussian:
      return DistributionField::from_function(grid, [&](const Vec3d& v) {
        return init.amplitude * std::exp(-init.width * (v - init.center).squaredNorm());
      });
    case Kind::Equilibrium:
      return fd_equilibrium(grid, solve_fd_params(init.rho, init.T, init.center));
    case Kind::Saturated:
      return saturated_state(grid, init.rho, init.center).field;
    case Kind::Snapshot: {
      Snapshot snap = read_snapshot(init.path);
      if (!(snap.field.grid == grid)) throw Error(ErrorCode::GridMismatch, "snapshot grid differs from [grid]");
      snap.field.validate();
      return snap.field;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown initial condition");
}

double choose_dt(const NodeField& total_freq, const DtPolicy& policy) {
  if (policy.dt > 0.0) return policy.dt;
  const double peak = total_freq.size() ? total_freq.maxCoeff() : 0.0;
  if (!(peak > 0.0)) return policy.dt_max;
  return std::min(policy.dt_max, policy.cfl / peak);
}

double choose_dt(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad,
                 const DtPolicy& policy) {
  if (policy.dt > 0.0) return policy.dt;
  return choose_dt(eval_Qbar1(f, kernel, quad), policy);
}

Eigen::Matrix<double, 5, 1> relative_invariant_drift(const DistributionField& reference,
                                                     const DistributionField& current) {
  const auto ref = invariant_moments(reference.values, reference.grid);
  const auto now = invariant_moments(current.values, current.grid);
  const double rho = std::max(std::abs(ref[0]), 1e-300);
  const double energy = std::max(std::abs(ref[4]), 1e-300);
  const double p_scale = std::sqrt(rho * energy);
  Eigen::Matrix<double, 5, 1> d = now - ref;
  d[0] /= rho;
  d.segment<3>(1) /= p_scale;
  d[4] /= energy;
  return d.cwiseAbs();
}

StepResult step_from_rates(const DistributionField& f, const CollisionRates& rates, double dt,
                           const StepOptions& options) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidParameter, "dt must be >= 0");
  StepResult out;
  out.field = f;
  if (dt == 0.0) {
    out.pre_min = f.values.minCoeff();
    out.pre_max = f.values.maxCoeff();
    return out;
  }
  NodeField next(f.values.size());
  for (Eigen::Index i = 0; i < next.size(); ++i) {
    const double L = rates.total_freq[i];
    // Convex combination of f and g/L in [0, 1]; clamping only absorbs rounding.
    const double raw = f.values[i] * std::exp(-L * dt) + relaxation_factor(L, dt) * rates.gain[i];
    next[i] = std::clamp(raw, 0.0, 1.0);
  }
  out.pre_min = next.minCoeff();
  out.pre_max = next.maxCoeff();
  if (!options.projection) {
    out.field.values = next;
    out.defect = max_abs(relative_invariant_drift(f, out.field));
    return out;
  }

  // Conservative repair by a logit tilt s = sigma(logit f+ + psi . lambda), lambda from Newton
  // on the five invariants. Its Jacobian is the f(1-f)-weighted Gram matrix; nodes at 0 or 1
  // stay put and every other node stays strictly inside (0, 1).
  const VelocityGrid& grid = f.grid;
  const Eigen::Index m = next.size();
  Eigen::Matrix<double, Eigen::Dynamic, 5> psi(m, 5);
  NodeField logit(m);
  std::vector<char> free(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec3d v = grid.node(static_cast<std::size_t>(i));
    psi.row(i) << 1.0, v.x(), v.y(), v.z(), v.squaredNorm();
    free[static_cast<std::size_t>(i)] = next[i] > 0.0 && next[i] < 1.0;
    logit[i] = free[static_cast<std::size_t>(i)] ? std::log(next[i]) - std::log1p(-next[i]) : 0.0;
  }
  const Eigen::Matrix<double, 5, 1> target = psi.transpose() * f.values;
  auto tilt = [&](const Eigen::Matrix<double, 5, 1>& lambda) {
    NodeField s = next;
    const NodeField shift = psi * lambda;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (free[static_cast<std::size_t>(i)]) s[i] = 1.0 / (1.0 + std::exp(-(logit[i] + shift[i])));
    }
    return s;
  };

  DistributionField trial(grid, next);
  Eigen::Matrix<double, 5, 1> lambda = Eigen::Matrix<double, 5, 1>::Zero();
  out.defect = max_abs(relative_invariant_drift(f, trial));
  for (int pass = 0; pass < options.max_repairs && out.defect > options.conservation_tol; ++pass) {
    NodeField w = trial.values.cwiseProduct(NodeField::Ones(m) - trial.values);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!free[static_cast<std::size_t>(i)]) w[i] = 0.0;
    }
    const Eigen::Matrix<double, 5, 5> jac = psi.transpose() * w.asDiagonal() * psi;
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 5, 5>> qr(jac);
    qr.setThreshold(1e-12);
    if (qr.rank() < 5) break;
    const Eigen::Matrix<double, 5, 1> delta = qr.solve(target - psi.transpose() * trial.values);
    const double before = out.defect;
    bool moved = false;
    double scale = 1.0;
    for (int k = 0; k < 30 && !moved; ++k, scale *= 0.5) {
      DistributionField cand(grid, tilt(lambda + scale * delta));
      const double d = max_abs(relative_invariant_drift(f, cand));
      if (d < out.defect) {
        lambda += scale * delta;
        trial = std::move(cand);
        out.defect = d;
        moved = true;
      }
    }
    out.repairs = pass + 1;
    // Slow progress means the root is at infinity; stop before nodes round to 0 or 1.
    if (!moved || out.defect > 0.25 * before) break;
  }

  // A target on the edge of the reachable set sends lambda off to infinity. The remaining
  // defect is then small and the weighted linear projection finishes the job.
  for (int pass = 0; pass < 5 && out.defect > options.conservation_tol; ++pass) {
    const NodeField weights = trial.values.cwiseProduct(NodeField::Ones(m) - trial.values);
    NodeField corrected;
    try {
      corrected = conservative_projection(trial.values - f.values, grid, &weights);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularGram) throw;
      corrected = conservative_projection(trial.values - f.values, grid);
      out.flags |= kFlagProjectionFallback;
    }
    trial.values = (f.values + corrected).cwiseMax(0.0).cwiseMin(1.0);
    out.defect = max_abs(relative_invariant_drift(f, trial));
    ++out.repairs;
  }
  if (out.defect > options.conservation_tol) out.flags |= kFlagProjectionFailed;
  out.field = std::move(trial);
  return out;
}

StepResult step_exponential(const DistributionField& f, double dt, const CollisionKernel& kernel,
                            const SphereQuadrature& quad, const StepOptions& options) {
  if (dt == 0.0) return step_from_rates(f, CollisionRates{}, 0.0, options);
  return step_from_rates(f, eval_rates(f, kernel, quad), dt, options);
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorCode::ValidationError, key + ": " + why);
  };
  if (n < 4) fail("grid.n", "must be >= 4");
  if (!(radius > 0.0) || !std::isfinite(radius)) fail("grid.radius", "must be positive");
  if (!(kernel.gamma >= 0.0 && kernel.gamma <= 2.0)) fail("kernel.gamma", "must lie in [0, 2]");
  if (kernel.speed_cap && !(*kernel.speed_cap > 0.0)) fail("kernel.speed_cap", "must be positive");
  if (kernel.alpha && !(*kernel.alpha < 2.0)) fail("kernel.alpha", "must be < 2");
  if (n_theta < 1) fail("kernel.n_theta", "must be >= 1");
  if (n_phi < 2 || n_phi % 2) fail("kernel.n_phi", "must be even and >= 2");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("time.t_end", "must be >= 0");
  if (dt_policy.dt < 0.0 || !std::isfinite(dt_policy.dt)) fail("time.dt", "must be >= 0 (0 selects the CFL rule)");
  if (!(dt_policy.cfl > 0.0 && dt_policy.cfl <= 1.0)) fail("time.cfl", "must lie in (0, 1]");
  if (!(dt_policy.dt_max > 0.0)) fail("time.dt_max", "must be positive");
  if (threads < 0) fail("time.threads", "must be >= 0");
  if (output_every < 1) fail("output.every", "must be >= 1");
  using Kind = InitialCondition::Kind;
  if (init.kind == Kind::Indicator || init.kind == Kind::Gaussian) {
    if (!(init.amplitude >= 0.0 && init.amplitude <= 1.0)) fail("init.amplitude", "must lie in [0, 1]");
  }
  if (init.kind == Kind::Indicator && !(init.radius > 0.0)) fail("init.radius", "must be positive");
  if (init.kind == Kind::Gaussian && !(init.width > 0.0)) fail("init.width", "must be positive");
  if ((init.kind == Kind::Equilibrium || init.kind == Kind::Saturated) && !(init.rho > 0.0)) {
    fail("init.rho", "must be positive");
  }
  if (init.kind == Kind::Equilibrium && !(init.T > 0.0)) fail("init.T", "must be positive");
  if (init.kind == Kind::Snapshot && init.path.empty()) fail("init.path", "required for snapshot data");
  try {
    resolve_kernel(*this).validate();
  } catch (const Error& e) {
    fail("kernel", e.what());
  }
}

CollisionKernel resolve_kernel(const SimulationConfig& config) {
  CollisionKernel k = config.kernel;
  if (!config.angular_table.empty()) k.angular = load_angular_table(config.angular_table);
  return k;
}

Trajectory run_simulation(const SimulationConfig& config) {
  config.validate();
  const VelocityGrid grid(config.n, config.radius);
  return run_simulation(config, build_initial(grid, config.init));
}

Trajectory run_simulation(const SimulationConfig& config, const DistributionField& f0) {
  config.validate();
  f0.validate();
  if (config.threads > 0) set_thread_count(config.threads);
  const CollisionKernel kernel = resolve_kernel(config);
  const SphereQuadrature quad(config.n_theta, config.n_phi);
  StepOptions opts;
  opts.projection = config.projection;

  Trajectory traj;
  DistributionField f = f0;
  double t = 0.0;
  auto row_for = [&](const DistributionField& g, double time) {
    StepRow row;
    row.t = time;
    row.min_f = g.values.minCoeff();
    row.max_f = g.values.maxCoeff();
    row.pre_min = row.min_f;
    row.pre_max = row.max_f;
    row.S = entropy(g);
    row.invariants = invariant_moments(g.values, g.grid);
    return row;
  };
  auto record = [&](const DistributionField& g, double time, const CollisionSweep& sweep) {
    traj.times.push_back(time);
    traj.snapshots.push_back(g);
    traj.records.push_back(make_record(time, g, &sweep.production));
  };

  traj.steps.push_back(row_for(f, 0.0));
  const double t_end = config.t_end;
  const double eps = 1e-12 * std::max(1.0, t_end);
  long step = 0;
  CollisionSweep sweep = eval_collision_sweep(f, kernel, quad, true);
  record(f, 0.0, sweep);
  while (t < t_end - eps) {
    const double dt = std::min(choose_dt(sweep.rates.total_freq, config.dt_policy), t_end - t);
    StepResult res = step_from_rates(f, sweep.rates, dt, opts);
    f = std::move(res.field);
    ++step;
    t = (t_end - (t + dt) <= eps) ? t_end : t + dt;
    StepRow row = row_for(f, t);
    row.dt = dt;
    row.pre_min = res.pre_min;
    row.pre_max = res.pre_max;
    row.defect = res.defect;
    row.flags = res.flags;
    traj.steps.push_back(row);
    const bool due = step % config.output_every == 0 || t >= t_end;
    sweep = eval_collision_sweep(f, kernel, quad, due);
    if (due) {
      record(f, t, sweep);
      traj.records.back().flags |= res.flags;
    }
  }
  return traj;
}

}  // namespace bfd
