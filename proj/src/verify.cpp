#include "bfd/verify.hpp"

#include "bfd/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace bfd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool holds(double x, const std::string& rel, double t) {
  if (std::isnan(x)) return false;
  if (rel == "<=") return x <= t;
  if (rel == "<") return x < t;
  if (rel == ">=") return x >= t;
  if (rel == ">") return x > t;
  throw Error(ErrorCode::InvalidParameter, "unknown relation " + rel);
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Trapezoid integral of D over records [i0, i1].
double trapezoid_D(const Trajectory& traj, std::size_t i0, std::size_t i1) {
  double acc = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    acc += 0.5 * (traj.records[i].D + traj.records[i + 1].D) * (traj.times[i + 1] - traj.times[i]);
  }
  return acc;
}

std::size_t nearest_record(const Trajectory& traj, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (std::abs(traj.times[i] - t) < std::abs(traj.times[best] - t)) best = i;
  }
  return best;
}

// Nonnegative seeded profile with ||psi||_{1,2} = 1.
NodeField perturbation_profile(const VelocityGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NodeField psi(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[static_cast<Eigen::Index>(i)] = u(rng) * std::exp(-g.node(i).squaredNorm());
  }
  return psi / weighted_norm(psi, g, 1.0, 2.0);
}

// Fit log(d / r) = log K + K' t by least squares over positive-distance records.
std::pair<double, double> fit_envelope(const std::vector<double>& times, const std::vector<double>& d, double r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(d[i] > 0.0)) continue;
    const double y = std::log(d[i] / r);
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
    ++m;
  }
  if (m < 2) return {kNaN, kNaN};
  const double det = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / det;
  const double icpt = (sy - slope * sx) / m;
  return {std::exp(icpt), slope};
}

double factor_between(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) return kNaN;
  return std::max(a / b, b / a);
}

}  // namespace

CheckResult& VerificationReport::add(const std::string& name, double measured, const std::string& relation,
                                     double threshold, bool informative, const std::string& note) {
  CheckResult c;
  c.name = name;
  c.measured = measured;
  c.relation = relation;
  c.threshold = threshold;
  c.pass = holds(measured, relation, threshold);
  c.informative = informative;
  c.note = note;
  checks.push_back(c);
  return checks.back();
}

CheckResult& VerificationReport::skip(const std::string& name, const std::string& note) {
  CheckResult c;
  c.name = name;
  c.relation = "skip";
  c.threshold = kNaN;
  c.pass = true;
  c.informative = true;
  c.skipped = true;
  c.note = note;
  checks.push_back(c);
  return checks.back();
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass || c.informative; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void VerificationReport::append(const VerificationReport& other) {
  for (CheckResult c : other.checks) {
    if (suite != other.suite) c.name = other.suite + "." + c.name;
    checks.push_back(std::move(c));
  }
}

void VerificationReport::write_kv(std::ostream& os) const {
  os << "suite = " << suite << "\nfingerprint = " << fingerprint << "\nverdict = " << (passed() ? "pass" : "fail")
     << "\nchecks = " << checks.size() << '\n';
  for (const auto& c : checks) {
    os << '\n' << "[" << c.name << "]\n";
    os << "measured = " << num(c.measured) << "\nrelation = " << c.relation << "\nthreshold = " << num(c.threshold)
       << "\npass = " << (c.pass ? "true" : "false") << "\ninformative = " << (c.informative ? "true" : "false")
       << '\n';
    if (!c.note.empty()) os << "note = " << c.note << '\n';
  }
}

void VerificationReport::write_csv(std::ostream& os, bool header) const {
  if (header) os << "suite,check,measured,relation,threshold,pass,informative,note\n";
  for (const auto& c : checks) {
    os << suite << ',' << csv_field(c.name) << ',' << num(c.measured) << ',' << c.relation << ','
       << num(c.threshold) << ',' << (c.pass ? "true" : "false") << ',' << (c.informative ? "true" : "false") << ','
       << csv_field(c.note) << '\n';
  }
}

VerificationReport check_conservation(const Trajectory& traj, bool projection, double tolerance) {
  VerificationReport rep;
  rep.suite = "conservation";
  if (traj.snapshots.size() < 2) {
    rep.add("drift_max", 0.0, "<", tolerance, false, "single snapshot");
    return rep;
  }
  Eigen::Matrix<double, 5, 1> worst = Eigen::Matrix<double, 5, 1>::Zero();
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    worst = worst.cwiseMax(relative_invariant_drift(traj.snapshots.front(), traj.snapshots[i]));
  }
  const auto end = relative_invariant_drift(traj.snapshots.front(), traj.snapshots.back());
  const bool info = !projection;
  const std::string note = projection ? "" : "projection disabled";
  rep.add("mass_drift_end", end[0], "<", tolerance, info, note);
  rep.add("momentum_drift_end", end.segment<3>(1).maxCoeff(), "<", tolerance, info, note);
  rep.add("energy_drift_end", end[4], "<", tolerance, info, note);
  rep.add("drift_max_over_run", worst.maxCoeff(), "<", tolerance, info, note);
  return rep;
}

VerificationReport check_pauli_bounds(const Trajectory& traj) {
  VerificationReport rep;
  rep.suite = "bounds";
  double lo = 1.0, hi = 0.0, pre_lo = 1.0, pre_hi = 0.0;
  for (const auto& s : traj.steps) {
    lo = std::min(lo, s.min_f);
    hi = std::max(hi, s.max_f);
    pre_lo = std::min(pre_lo, s.pre_min);
    pre_hi = std::max(pre_hi, s.pre_max);
  }
  rep.add("min_f", lo, ">=", 0.0);
  rep.add("max_f", hi, "<=", 1.0);
  rep.add("min_f_before_repair", pre_lo, ">=", 0.0);
  rep.add("max_f_before_repair", pre_hi, "<=", 1.0);
  rep.add("steps", static_cast<double>(traj.steps.size() - 1), ">=", 0.0, true);
  return rep;
}

VerificationReport check_h_theorem(const Trajectory& traj) {
  VerificationReport rep;
  rep.suite = "h_theorem";
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.steps.size(); ++i) {
    const double s0 = traj.steps[i - 1].S;
    worst = std::min(worst, (traj.steps[i].S - s0) / std::max(1.0, std::abs(s0)));
  }
  if (traj.steps.size() < 2) worst = 0.0;
  rep.add("entropy_step_increase", worst, ">=", -1e-8);

  std::size_t start = 0;
  bool any = false;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    if (traj.records[i].flags & kFlagGammaSaturated) {
      start = i + 1;
      any = true;
    }
  }
  const std::size_t last = traj.records.empty() ? 0 : traj.records.size() - 1;
  if (traj.records.size() < 2 || start >= last) {
    rep.skip("entropy_identity", "no record window free of gamma saturation");
    return rep;
  }
  const double dS = traj.records[last].S - traj.records[start].S;
  const double prod = trapezoid_D(traj, start, last);
  const double scale = std::max(std::abs(dS), std::abs(prod));
  const double rel = scale > 0.0 ? std::abs(dS - prod) / scale : 0.0;
  std::ostringstream note;
  note << std::setprecision(6) << "window [" << traj.times[start] << ", " << traj.times[last] << "], dS = " << dS
       << ", int D = " << prod;
  if (any) note << ", earlier records gamma-saturated";
  rep.add("entropy_identity", rel, "<=", 0.05, false, note.str());
  rep.add("window_start", traj.times[start], ">=", 0.0, true);
  return rep;
}

VerificationReport check_moment_creation(const std::vector<Trajectory>& levels, double s, double gamma,
                                         double t_min) {
  VerificationReport rep;
  rep.suite = "moment_creation";
  std::vector<double> sups;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Trajectory& tr = levels[l];
    double sup = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double t = tr.times[i];
      if (t < t_min - 1e-12 || t > 1.0 + 1e-12) continue;
      const double weight = std::min(std::pow(t, (s - 2.0) / gamma), 1.0);
      sup = std::max(sup, moment(tr.snapshots[i], s) * weight);
      any = true;
    }
    if (!any) sup = kNaN;
    sups.push_back(sup);
    rep.add("windowed_sup_level_" + std::to_string(l), std::isfinite(sup) ? sup : kNaN, ">=", 0.0, false,
            "sup of m_s(t) min(t^((s-2)/gamma), 1)");
  }
  for (std::size_t l = 1; l < sups.size(); ++l) {
    rep.add("level_ratio_" + std::to_string(l - 1) + "_" + std::to_string(l), factor_between(sups[l - 1], sups[l]),
            "<=", 2.0);
  }
  return rep;
}

std::vector<DistributionField> random_admissible_fields(const VelocityGrid& grid, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DistributionField> out;
  for (int k = 0; k < count; ++k) {
    const double width = 0.5 + u(rng);
    const double amp = 0.05 + 0.95 * u(rng);
    const Vec3d c(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
    out.push_back(DistributionField::from_function(
        grid, [&](const Vec3d& v) { return amp * u(rng) * std::exp(-width * (v - c).squaredNorm()); }));
  }
  return out;
}

MomentInequality moment_ode_terms(const DistributionField& f, const CollisionKernel& kernel,
                                  const SphereQuadrature& quad, double s, int p, double varpi) {
  const double sp = s * p;
  const double gamma = kernel.gamma;
  const NodeField gain = eval_Qc_gain_direct(f, f, kernel, quad);
  const NodeField loss = eval_Qc_loss(f, f, kernel, quad);
  const VelocityGrid& g = f.grid;
  double gain_m = 0.0, loss_m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::pow(g.node(i).norm(), sp);
    gain_m += gain[static_cast<Eigen::Index>(i)] * w;
    loss_m += loss[static_cast<Eigen::Index>(i)] * w;
  }
  gain_m *= g.cell_volume();
  loss_m *= g.cell_volume();
  MomentInequality m;
  m.varpi = varpi;
  m.lhs = gain_m - loss_m;
  m.eps_quad = 1e-12 * (std::abs(gain_m) + std::abs(loss_m));
  m.K1 = std::pow(2.0, 2.0 - gamma) * (1.0 - varpi) * moment(f, 0.0);
  m.K2 = 2.0 * moment(f, gamma);
  m.rhs = compute_Cb(kernel) *
          (2.0 * varpi * moment_combination_Ssp(f, s, p, gamma) - m.K1 * moment(f, sp + gamma) + m.K2 * moment(f, sp));
  return m;
}

VerificationReport check_moment_ode_bound(const std::vector<DistributionField>& fields, const CollisionKernel& kernel,
                                          const SphereQuadrature& quad, double s, int p) {
  VerificationReport rep;
  rep.suite = "moment_ode";
  if (!(s * p > 2.0)) throw Error(ErrorCode::InvalidParameter, "moment inequality needs sp > 2");
  const double varpi = povzner_constant(kernel, 0.5 * s * p);
  rep.add("varpi_sp_half", varpi, "<", 1.0, true);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto m = moment_ode_terms(fields[k], kernel, quad, s, p, varpi);
    std::ostringstream note;
    note << std::setprecision(6) << "lhs = " << m.lhs << ", rhs = " << m.rhs << ", eps_quad = " << m.eps_quad;
    char name[32];
    std::snprintf(name, sizeof name, "field_%02zu", k);
    rep.add(name, m.lhs - m.rhs, "<=", m.eps_quad, false, note.str());
    worst = std::max(worst, m.lhs - m.rhs - m.eps_quad);
  }
  if (!fields.empty()) rep.add("worst_excess", worst, "<=", 0.0);
  return rep;
}

VerificationReport check_exponential_moment(const Trajectory& traj, double a, double gamma) {
  VerificationReport rep;
  rep.suite = "exp_moment";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double rate = a * std::min(traj.times[i], 1.0);
    const double e = gamma > 0.0 ? exp_moment(traj.snapshots[i], rate, gamma) : std::exp(rate) * moment(traj.snapshots[i], 0.0);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  rep.add("max_over_min", lo > 0.0 ? hi / lo : kNaN, "<=", 10.0);
  rep.add("max_value", hi, ">=", 0.0, true);
  return rep;
}

VerificationReport check_lower_bound_creation(const Trajectory& traj, const CollisionKernel& kernel,
                                              const SphereQuadrature& quad, double delta, double eta,
                                              double region_fraction) {
  VerificationReport rep;
  rep.suite = "lower_bound";
  const DistributionField& f0 = traj.snapshots.front();
  const VelocityGrid& g = f0.grid;
  const double region = region_fraction * g.radius();

  auto certificate = [&](const DistributionField& f, const std::string& tag, bool informative) {
    try {
      const auto fit = fit_lower_gaussian(f, region);
      std::ostringstream note;
      note << std::setprecision(6) << "C1 = " << fit.C1 << ", C2 = " << fit.C2 << ", violations = " << fit.violations;
      rep.add(tag + "_C1", fit.C1, ">", 0.0, informative, note.str());
      rep.add(tag + "_violations", static_cast<double>(fit.violations), "<=", 0.0, informative, note.str());
    } catch (const Error& e) {
      rep.add(tag + "_C1", kNaN, ">", 0.0, informative, e.what());
    }
  };
  certificate(f0, "initial_certificate", true);
  certificate(traj.snapshots.back(), "final_certificate", false);
  rep.add("final_time", traj.times.back(), ">", 0.0, true);

  const NodeField q1 = eval_Q1(g, Operand::occupation(f0), Operand::occupation(f0), Operand::complement(f0), kernel, quad);
  const double outer = std::sqrt(2.0) * delta * (1.0 - eta);
  double lo = std::numeric_limits<double>::infinity();
  int nodes = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.node(i).norm();
    if (r > delta && r <= outer) {
      lo = std::min(lo, q1[static_cast<Eigen::Index>(i)]);
      ++nodes;
    }
  }
  if (nodes == 0) {
    rep.add("spreading_min_Q1", kNaN, ">", 0.0, false, "no nodes on the annulus");
  } else {
    rep.add("spreading_min_Q1", lo, ">", 0.0, false, std::to_string(nodes) + " annulus nodes");
  }
  return rep;
}

VerificationReport check_upper_envelopes(const Trajectory& traj, const CollisionKernel& kernel, double a0,
                                         const std::vector<double>& times, double s_prime) {
  VerificationReport rep;
  rep.suite = "upper_envelopes";
  const double w0 = weighted_norm(traj.snapshots.front(), std::numeric_limits<double>::infinity(), s_prime);
  for (double t : times) {
    const std::size_t i = nearest_record(traj, t);
    const DistributionField& f = traj.snapshots[i];
    std::ostringstream tag;
    tag << "t" << std::setprecision(4) << traj.times[i];
    if (f.values.maxCoeff() == 0.0) {
      rep.add(tag.str() + "_gaussian_rate", a0, "<=", a0, false, "zero field");
      rep.add(tag.str() + "_stretched_violations", 0.0, "<=", 0.0, false, "zero field");
      continue;
    }
    try {
      const auto up = fit_upper_gaussian(f, a0);
      std::ostringstream note;
      note << std::setprecision(6) << "a = " << up.C2 << ", c = " << up.c << ", violations = " << up.violations;
      rep.add(tag.str() + "_gaussian_rate", up.C2, ">", 0.0, false, note.str());
      rep.add(tag.str() + "_gaussian_violations", static_cast<double>(up.violations), "<=", 0.0, false, note.str());
    } catch (const Error& e) {
      rep.add(tag.str() + "_gaussian_rate", kNaN, ">", 0.0, false, e.what());
    }
    try {
      const auto st = fit_upper_stretched(f);
      std::ostringstream note;
      note << std::setprecision(6) << "C1 = " << st.C1 << ", C2 = " << st.C2 << ", p = " << st.exponent;
      rep.add(tag.str() + "_stretched_C1", st.C1, ">", 0.0, false, note.str());
      rep.add(tag.str() + "_stretched_violations", static_cast<double>(st.violations), "<=", 0.0, false, note.str());
    } catch (const Error& e) {
      rep.add(tag.str() + "_stretched_C1", kNaN, ">", 0.0, false, e.what());
    }
  }
  if (!kernel.angular.is_constant()) {
    rep.skip("polynomial_sup_growth", "hypothesis not met: angular law is not constant");
  } else if (!(w0 > 0.0)) {
    rep.add("polynomial_sup_growth", 1.0, "<=", 10.0, false, "zero initial data");
  } else {
    double worst = 0.0;
    for (const auto& f : traj.snapshots) {
      worst = std::max(worst, weighted_norm(f, std::numeric_limits<double>::infinity(), s_prime) / w0);
    }
    rep.add("polynomial_sup_growth", worst, "<=", 10.0, false, "sup (1+|v|^2)^(s'/2) f relative to t = 0");
  }
  return rep;
}

StabilityRuns run_stability(const SimulationConfig& config, const std::vector<double>& r_values) {
  const VelocityGrid grid(config.n, config.radius);
  const DistributionField f0 = build_initial(grid, config.init);
  const NodeField psi = perturbation_profile(grid, config.seed);
  const Trajectory ref = run_simulation(config, f0);
  StabilityRuns out;
  out.r_values = r_values;
  out.times = ref.times;
  for (double r : r_values) {
    DistributionField g0(grid, (f0.values + r * psi).cwiseMax(0.0).cwiseMin(1.0));
    const Trajectory tr = run_simulation(config, g0);
    std::vector<double> d;
    for (std::size_t i = 0; i < ref.snapshots.size(); ++i) d.push_back(l12_distance(ref.snapshots[i], tr.snapshots[i]));
    out.distances.push_back(std::move(d));
  }
  return out;
}

VerificationReport check_stability(const StabilityRuns& runs, bool envelope) {
  VerificationReport rep;
  rep.suite = "stability";
  std::vector<std::size_t> order(runs.r_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return runs.r_values[a] > runs.r_values[b]; });
  bool finite = true;
  for (const auto& d : runs.distances) {
    for (double x : d) finite = finite && std::isfinite(x);
  }
  rep.add("distances_finite", finite ? 1.0 : 0.0, ">=", 1.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& d = runs.distances[order[k]];
    std::ostringstream name;
    name << "distance_final_r" << std::setprecision(3) << runs.r_values[order[k]];
    rep.add(name.str(), d.back(), ">=", 0.0, true, "initial " + num(d.front()));
  }
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double big = runs.distances[order[k - 1]].back();
    const double small = runs.distances[order[k]].back();
    std::ostringstream name;
    name << "decrease_r" << std::setprecision(3) << runs.r_values[order[k - 1]] << "_to_r" << runs.r_values[order[k]];
    rep.add(name.str(), small / big, "<", 1.0, false, "ratio of final distances");
  }
  if (envelope && order.size() >= 2) {
    const std::size_t a = order[order.size() - 2], b = order.back();
    const auto [Ka, Kpa] = fit_envelope(runs.times, runs.distances[a], runs.r_values[a]);
    const auto [Kb, Kpb] = fit_envelope(runs.times, runs.distances[b], runs.r_values[b]);
    const double t_end = runs.times.back();
    std::ostringstream note;
    note << std::setprecision(6) << "K = " << Ka << ", " << Kb << "; K' = " << Kpa << ", " << Kpb;
    rep.add("envelope_K_factor", factor_between(Ka, Kb), "<=", 2.0, false, note.str());
    rep.add("envelope_growth_factor", factor_between(std::exp(Kpa * t_end), std::exp(Kpb * t_end)), "<=", 2.0, false,
            note.str());
    // The fitted envelope must actually bound each run (up to its least-squares scatter, absorbed into K).
    double excess = 0.0;
    for (std::size_t idx : {a, b}) {
      const auto [K, Kp] = idx == a ? std::make_pair(Ka, Kpa) : std::make_pair(Kb, Kpb);
      for (std::size_t i = 0; i < runs.times.size(); ++i) {
        excess = std::max(excess, runs.distances[idx][i] / (K * runs.r_values[idx] * std::exp(Kp * runs.times[i])));
      }
    }
    rep.add("envelope_scatter", excess, "<=", 2.0, true, "largest d / (K r e^{K' t}) over both runs");
  }
  return rep;
}

TruncationRuns run_kernel_truncation(const SimulationConfig& config, const std::vector<double>& caps) {
  SimulationConfig base = config;
  base.kernel.speed_cap.reset();
  const Trajectory ref = run_simulation(base);
  auto sup_gap = [&](double cap) {
    SimulationConfig c = base;
    c.kernel.speed_cap = cap;
    const Trajectory tr = run_simulation(c);
    double sup = 0.0;
    for (std::size_t i = 0; i < ref.snapshots.size(); ++i) sup = std::max(sup, l12_distance(ref.snapshots[i], tr.snapshots[i]));
    return sup;
  };
  TruncationRuns out;
  out.caps = caps;
  for (double cap : caps) out.sup_distance.push_back(sup_gap(cap));
  // Largest relative speed on the grid is the cube diagonal; the capped factor r^gamma never binds above it.
  const double reach = 2.0 * std::sqrt(3.0) * config.radius;
  out.inactive_cap = 2.0 * std::pow(reach, config.kernel.gamma) + 1.0;
  out.inactive_distance = sup_gap(out.inactive_cap);
  return out;
}

VerificationReport check_kernel_truncation(const TruncationRuns& runs) {
  VerificationReport rep;
  rep.suite = "truncation";
  std::vector<std::size_t> order(runs.caps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return runs.caps[a] < runs.caps[b]; });
  for (std::size_t idx : order) {
    rep.add("sup_gap_cap" + num(runs.caps[idx]), runs.sup_distance[idx], ">=", 0.0, true);
  }
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double prev = runs.sup_distance[order[k - 1]];
    const double cur = runs.sup_distance[order[k]];
    rep.add("shrink_cap" + num(runs.caps[order[k - 1]]) + "_to_cap" + num(runs.caps[order[k]]), cur / prev, "<", 1.0);
  }
  if (!order.empty()) {
    rep.add("shrink_to_inactive_cap", runs.inactive_distance / runs.sup_distance[order.back()], "<", 1.0);
  }
  rep.add("inactive_cap_gap", runs.inactive_distance, "<=", 0.0, false, "cap " + num(runs.inactive_cap));
  return rep;
}

VerificationReport check_equilibrium(const SimulationConfig& config, int steps, int coarse_n) {
  VerificationReport rep;
  rep.suite = "equilibrium";
  const CollisionKernel kernel = resolve_kernel(config);
  const SphereQuadrature quad(config.n_theta, config.n_phi);
  const auto params = solve_fd_params(config.init.rho, config.init.T, config.init.center);
  const VelocityGrid grid(config.n, config.radius);
  const DistributionField f0 = fd_equilibrium(grid, params);

  SimulationConfig c = config;
  c.init.kind = InitialCondition::Kind::Equilibrium;
  const double dt = c.dt_policy.dt > 0.0 ? c.dt_policy.dt : choose_dt(f0, kernel, quad, c.dt_policy);
  c.dt_policy.dt = dt;
  c.t_end = steps * dt;
  c.output_every = steps;
  const Trajectory tr = run_simulation(c, f0);
  const double drift = (tr.snapshots.back().values - f0.values).cwiseAbs().maxCoeff();
  const NodeField q_fine = eval_QFD(f0, kernel, quad);
  const double res_fine = q_fine.cwiseAbs().maxCoeff();
  std::ostringstream note;
  note << std::setprecision(6) << steps << " steps of dt = " << dt << " on " << config.n
       << "^3; residual-times-time bound " << res_fine * c.t_end;
  rep.add("sup_node_drift", drift, "<=", 1e-6, false, note.str());

  const VelocityGrid coarse(coarse_n, config.radius);
  const double res_coarse = eval_QFD(fd_equilibrium(coarse, params), kernel, quad).cwiseAbs().maxCoeff();
  std::ostringstream n2;
  n2 << std::setprecision(6) << "max|Q_FD| = " << res_coarse << " at " << coarse_n << "^3, " << res_fine << " at "
     << config.n << "^3";
  rep.add("residual_ratio", res_fine / res_coarse, "<=", 0.5, false, n2.str());
  return rep;
}

VerificationReport check_povzner(const CollisionKernel& kernel) {
  VerificationReport rep;
  rep.suite = "povzner";
  const double w1 = povzner_constant(kernel, 1.0);
  const double w2 = povzner_constant(kernel, 2.0);
  rep.add("varpi_1_error", std::abs(w1 - 1.0), "<=", 1e-3, false, "varpi_1 = " + num(w1));
  rep.add("varpi_2_minus_varpi_1", w2 - w1, "<", 0.0, false, "varpi_2 = " + num(w2));
  return rep;
}

VerificationReport check_carleman(const std::vector<int>& sizes, double radius, const CollisionKernel& kernel,
                                  const SphereQuadrature& quad) {
  VerificationReport rep;
  rep.suite = "carleman";
  std::vector<double> gaps;
  for (int n : sizes) {
    const VelocityGrid g(n, radius);
    const auto f = DistributionField::from_function(g, [](const Vec3d& v) { return 0.5 * std::exp(-v.squaredNorm()); });
    const NodeField direct = eval_Qc_gain_direct(f, f, kernel, quad);
    const NodeField carleman = eval_Qc_gain_carleman(f, f, kernel);
    const double gap = (carleman - direct).cwiseAbs().sum() / direct.cwiseAbs().sum();
    gaps.push_back(gap);
    rep.add("gap_n" + std::to_string(n), gap, ">=", 0.0, true, "relative L1 gap");
  }
  if (!gaps.empty()) rep.add("gap_finest", gaps.back(), "<=", 0.05);
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    rep.add("gap_decrease_n" + std::to_string(sizes[i - 1]) + "_to_n" + std::to_string(sizes[i]), gaps[i] / gaps[i - 1],
            "<", 1.0);
  }
  return rep;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "conservation", "bounds",    "h_theorem", "moment_creation", "moment_ode", "exp_moment", "lower_bound",
      "upper_envelopes", "stability", "truncation", "equilibrium", "povzner",   "carleman",
  };
  return names;
}

VerificationReport run_suite(const std::string& name, const SimulationConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const CollisionKernel kernel = resolve_kernel(config);
  const SphereQuadrature quad(config.n_theta, config.n_phi);
  const VelocityGrid grid(config.n, config.radius);
  VerificationReport rep;

  // The base run from the configured initial data, shared by the trajectory suites.
  std::map<std::string, Trajectory> cache;
  auto base_run = [&]() -> const Trajectory& {
    auto it = cache.find("base");
    if (it == cache.end()) it = cache.emplace("base", run_simulation(config)).first;
    return it->second;
  };
  auto one = [&](const std::string& suite) -> VerificationReport {
    if (suite == "conservation") return check_conservation(base_run(), config.projection);
    if (suite == "bounds") return check_pauli_bounds(base_run());
    if (suite == "h_theorem") return check_h_theorem(base_run());
    if (suite == "moment_creation") {
      std::vector<Trajectory> levels;
      for (int n : {std::max(6, config.n - 4), config.n}) {
        SimulationConfig c = config;
        c.n = n;
        levels.push_back(n == config.n ? base_run() : run_simulation(c));
      }
      return check_moment_creation(levels, 4.0, std::max(config.kernel.gamma, 1e-12));
    }
    if (suite == "moment_ode") {
      return check_moment_ode_bound(random_admissible_fields(grid, 20, config.seed), kernel, quad, 1.0, 4);
    }
    if (suite == "exp_moment") return check_exponential_moment(base_run(), 0.5, config.kernel.gamma);
    if (suite == "lower_bound") {
      const double delta = config.init.kind == InitialCondition::Kind::Indicator ? config.init.radius : 1.0;
      return check_lower_bound_creation(base_run(), kernel, quad, delta);
    }
    if (suite == "upper_envelopes") {
      SimulationConfig c = config;
      c.init = InitialCondition{};
      c.init.kind = InitialCondition::Kind::Gaussian;
      c.init.amplitude = 0.5;
      c.init.width = 1.0;
      return check_upper_envelopes(run_simulation(c), kernel, 1.0, {0.25 * c.t_end, 0.5 * c.t_end, c.t_end});
    }
    if (suite == "stability") {
      VerificationReport r = check_stability(run_stability(config, {1e-1, 1e-2, 1e-3}), false);
      SimulationConfig c = config;
      c.kernel.gamma = 0.0;
      VerificationReport r0 = check_stability(run_stability(c, {1e-1, 1e-2, 1e-3}), true);
      r0.suite = "stability_gamma0";
      r.append(r0);
      return r;
    }
    if (suite == "truncation") return check_kernel_truncation(run_kernel_truncation(config, {1.0, 2.0, 4.0}));
    if (suite == "equilibrium") {
      SimulationConfig c = config;
      c.init = InitialCondition{};
      c.init.kind = InitialCondition::Kind::Equilibrium;
      return check_equilibrium(c, 10, std::max(6, (2 * config.n) / 3));
    }
    if (suite == "povzner") return check_povzner(kernel);
    if (suite == "carleman") {
      std::vector<int> sizes = {std::max(6, config.n / 2), config.n};
      return check_carleman(sizes, config.radius, kernel, quad);
    }
    throw Error(ErrorCode::InvalidParameter, "unknown verification suite '" + suite + "'");
  };

  if (name == "all") {
    rep.suite = "all";
    for (const auto& s : suite_names()) rep.append(one(s));
  } else {
    rep = one(name);
  }
  rep.fingerprint = config_fingerprint(config);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace bfd
