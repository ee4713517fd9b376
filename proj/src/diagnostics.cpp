#include "bfd/diagnostics.hpp"

#include "bfd/error.hpp"
#include "bfd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>

namespace bfd {

namespace {

constexpr double kFitSlack = 1e-12;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Radical inverse in the given prime base.
double halton(std::size_t index, unsigned base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

Vec3d unit_direction(double u, double w) {
  const double z = 2.0 * u - 1.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * std::numbers::pi * w;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

struct ShellPoint {
  double x;  // |v|^q
  double y;  // ln value
};

// Least-squares line y = alpha + beta x.
std::pair<double, double> fit_line(const std::vector<ShellPoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
    sxx += p.x * p.x;
    sxy += p.x * p.y;
  }
  const double m = static_cast<double>(pts.size());
  const double det = m * sxx - sx * sx;
  if (std::abs(det) <= 1e-300) return {sy / m, 0.0};
  const double beta = (m * sxy - sx * sy) / det;
  return {(sy - beta * sx) / m, beta};
}

// Per-shell extreme (min if lower) of positive values; shells of width dv in |v|.
std::vector<ShellPoint> shell_extremes(const NodeField& values, const VelocityGrid& g, double q, bool lower) {
  std::map<long, std::pair<double, double>> shells;  // shell -> (value, |v|^q of the achieving node)
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = values[static_cast<Eigen::Index>(i)];
    if (!(y > 0.0)) continue;
    const double r = g.node(i).norm();
    const long k = static_cast<long>(std::floor(r / g.spacing()));
    auto it = shells.find(k);
    if (it == shells.end()) {
      shells.emplace(k, std::make_pair(y, std::pow(r, q)));
    } else if (lower ? y < it->second.first : y > it->second.first) {
      it->second = {y, std::pow(r, q)};
    }
  }
  std::vector<ShellPoint> pts;
  for (const auto& [k, v] : shells) {
    if (v.first > 1e-30) pts.push_back({v.second, std::log(v.first)});
  }
  return pts;
}

EnvelopeFit lower_fit(const NodeField& values, const VelocityGrid& g, double q, double region_radius,
                      bool require_positive_everywhere) {
  const auto pts = shell_extremes(values, g, q, true);
  if (pts.size() < 3) throw Error(ErrorCode::InsufficientSupport, "fewer than 3 usable shells");
  const auto [alpha, beta] = fit_line(pts);
  EnvelopeFit fit;
  fit.exponent = q;
  fit.shells_used = static_cast<int>(pts.size());
  fit.C2 = -beta;
  double log_c1 = alpha;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = values[static_cast<Eigen::Index>(i)];
    if (y > 0.0) log_c1 = std::min(log_c1, std::log(y) + fit.C2 * std::pow(g.node(i).norm(), q));
  }
  log_c1 -= kFitSlack * (1.0 + std::abs(log_c1));  // keeps the certificate clear of rounding
  fit.C1 = std::exp(log_c1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = values[static_cast<Eigen::Index>(i)];
    const double r = g.node(i).norm();
    const bool in_region = require_positive_everywhere || r <= region_radius;
    if (y > 0.0) {
      if (y < fit.C1 * std::exp(-fit.C2 * std::pow(r, q))) ++fit.violations;
    } else if (in_region) {
      ++fit.violations;
    }
  }
  fit.certified = fit.C1 > 0.0 && std::isfinite(fit.C2) && fit.violations == 0;
  return fit;
}

}  // namespace

double weighted_norm(const NodeField& values, const VelocityGrid& grid, double p, double s) {
  if (s < 0.0) throw Error(ErrorCode::InvalidParameter, "weight exponent s must be >= 0");
  const bool inf = std::isinf(p) && p > 0;
  if (!(p == 1.0 || p == 2.0 || inf)) throw Error(ErrorCode::UnsupportedNorm, "p must be 1, 2 or infinity");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = std::pow(1.0 + grid.node(i).squaredNorm(), 0.5 * s);
    const double x = std::abs(values[static_cast<Eigen::Index>(i)]) * w;
    if (inf) {
      acc = std::max(acc, x);
    } else {
      acc += p == 1.0 ? x : x * x;
    }
  }
  if (inf) return acc;
  acc *= grid.cell_volume();
  return p == 1.0 ? acc : std::sqrt(acc);
}

double moment(const DistributionField& f, double s) {
  return integrate(f, [s](const Vec3d& v) { return s == 0.0 ? 1.0 : std::pow(v.norm(), s); });
}

double moment_combination_Ssp(const DistributionField& f, double s, int p, double gamma) {
  if (p < 2) throw Error(ErrorCode::InvalidParameter, "S_{s,p} needs an integer p >= 2");
  const int kp = (p + 1) / 2;
  double sum = 0.0;
  double binom = 1.0;
  for (int k = 1; k <= kp; ++k) {
    binom = binom * (p - k + 1) / k;
    sum += binom * (moment(f, s * k + gamma) * moment(f, s * (p - k)) +
                    moment(f, s * k) * moment(f, s * (p - k) + gamma));
  }
  return sum;
}

double log_exp_moment(const DistributionField& f, double a, double s) {
  const VelocityGrid& g = f.grid;
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(g.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double fi = f.values[static_cast<Eigen::Index>(i)];
    if (fi > 0.0) {
      logs[i] = std::log(fi) + a * std::pow(g.node(i).norm(), s);
      peak = std::max(peak, logs[i]);
    }
  }
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - peak);
  return peak + std::log(sum * g.cell_volume());
}

double exp_moment(const DistributionField& f, double a, double s) {
  if (a < 0.0 || !(s > 0.0 && s <= 2.0)) throw Error(ErrorCode::InvalidParameter, "need a >= 0, s in (0, 2]");
  const double reach = std::sqrt(3.0) * f.grid.radius();
  if (a * std::pow(reach, s) > 500.0) return std::exp(log_exp_moment(f, a, s));
  return integrate(f, [a, s](const Vec3d& v) { return std::exp(a * std::pow(v.norm(), s)); });
}

double entropy(const DistributionField& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    const double x = f.values[i];
    acc += xlogx(x) + xlogx(1.0 - x);
  }
  return -acc * f.grid.cell_volume();
}

EntropyProduction entropy_production(const DistributionField& f, const CollisionKernel& kernel,
                                     const SphereQuadrature& quad) {
  return eval_collision_sweep(f, kernel, quad, true).production;
}

EnvelopeFit fit_lower_gaussian(const DistributionField& f, double region_radius) {
  return lower_fit(f.values, f.grid, 2.0, region_radius, false);
}

EnvelopeFit fit_upper_gaussian(const DistributionField& f, double a_max) {
  const VelocityGrid& g = f.grid;
  const auto pts = shell_extremes(f.values, g, 2.0, false);
  if (pts.size() < 3) throw Error(ErrorCode::InsufficientSupport, "fewer than 3 usable shells");
  const auto [alpha, beta] = fit_line(pts);
  EnvelopeFit fit;
  fit.shells_used = static_cast<int>(pts.size());
  fit.C2 = std::min(-beta, a_max);
  fit.c = alpha;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = f.values[static_cast<Eigen::Index>(i)];
    if (y > 0.0) fit.c = std::max(fit.c, std::log(y) + fit.C2 * g.node(i).squaredNorm());
  }
  fit.c += kFitSlack * (1.0 + std::abs(fit.c));
  fit.C1 = std::exp(fit.c);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = f.values[static_cast<Eigen::Index>(i)];
    if (y > std::exp(-fit.C2 * g.node(i).squaredNorm() + fit.c)) ++fit.violations;
  }
  fit.certified = fit.C2 > 0.0 && std::isfinite(fit.c) && fit.violations == 0;
  return fit;
}

EnvelopeFit fit_upper_stretched(const DistributionField& f) {
  const NodeField complement = NodeField::Ones(f.values.size()) - f.values;
  return lower_fit(complement, f.grid, kStretchedExponent, 0.0, true);
}

double l12_distance(const DistributionField& f, const DistributionField& g) {
  if (!(f.grid == g.grid)) throw Error(ErrorCode::GridMismatch, "distance between fields on different grids");
  return weighted_norm(f.values - g.values, f.grid, 1.0, 2.0);
}

double phi_stability(double r, const DistributionField& f0) {
  if (r < 0.0) throw Error(ErrorCode::InvalidParameter, "Phi needs r >= 0");
  if (r == 0.0) return 0.0;
  const double cut = std::pow(r, -1.0 / 3.0);
  NodeField tail = f0.values;
  for (std::size_t i = 0; i < f0.grid.size(); ++i) {
    if (f0.grid.node(i).norm() < cut) tail[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return r + std::cbrt(r) + r * std::abs(std::log(r)) + weighted_norm(tail, f0.grid, 1.0, 2.0);
}

double povzner_ratio(const CollisionKernel& kernel, double p, const Vec3d& v, const Vec3d& v_star) {
  static const SphereQuadrature quad(24, 48);
  const double energy = v.squaredNorm() + v_star.squaredNorm();
  if (!(energy > 0.0)) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec3d& s = quad.direction(k);
    const auto [vp, vsp] = post_collision_sigma(v, v_star, s);
    acc += quad.weight(k) * kernel.angular(cos_theta_sigma(v, v_star, s)) *
           (std::pow(vp.squaredNorm(), p) + std::pow(vsp.squaredNorm(), p));
  }
  return acc / (compute_Cb(kernel) * std::pow(energy, p));
}

double povzner_constant(const CollisionKernel& kernel, double p, int sample_count) {
  if (p < 1.0) throw Error(ErrorCode::InvalidParameter, "Povzner constant needs p >= 1");
  double best = 0.0;
  for (int i = 1; i <= sample_count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Vec3d v = std::cbrt(halton(idx, 2)) * unit_direction(halton(idx, 3), halton(idx, 5));
    const Vec3d w = std::cbrt(halton(idx, 7)) * unit_direction(halton(idx, 11), halton(idx, 13));
    best = std::max(best, povzner_ratio(kernel, p, v, w));
  }
  return best;
}

std::string flags_to_string(std::uint32_t flags) {
  static const std::pair<std::uint32_t, const char*> names[] = {
      {kFlagGammaSaturated, "gamma_saturated"},
      {kFlagProjectionFailed, "projection_failed"},
      {kFlagLowerFitUnavailable, "lower_fit_unavailable"},
      {kFlagUpperFitUnavailable, "upper_fit_unavailable"},
      {kFlagProjectionFallback, "projection_fallback"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

DiagnosticsRecord make_record(double t, const DistributionField& f, const EntropyProduction* production) {
  DiagnosticsRecord r;
  r.t = t;
  if (f.values.sum() > 0.0) r.macro = macro_moments(f);  // vacuum keeps rho = T = 0
  r.m2 = moment(f, 2.0);
  r.m4 = moment(f, 4.0);
  r.m6 = moment(f, 6.0);
  r.S = entropy(f);
  if (production) {
    r.D = production->total;
    if (production->saturated) r.flags |= kFlagGammaSaturated;
  }
  r.min_f = f.values.minCoeff();
  r.max_f = f.values.maxCoeff();
  try {
    const EnvelopeFit lo = fit_lower_gaussian(f);
    r.C1_lo = lo.C1;
    r.C2_lo = lo.C2;
  } catch (const Error&) {
    r.flags |= kFlagLowerFitUnavailable;
  }
  try {
    const EnvelopeFit up = fit_upper_gaussian(f);
    r.a_up = up.C2;
    r.c_up = up.c;
  } catch (const Error&) {
    r.flags |= kFlagUpperFitUnavailable;
  }
  r.boundary_mass = boundary_mass(f);
  return r;
}

void write_csv_header(std::ostream& os) {
  os << "t,rho,ux,uy,uz,T,m2,m4,m6,S,D,min_f,max_f,C1_lo,C2_lo,a_up,c_up,boundary_mass,flags\n";
}

void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  const auto old = os.precision();
  os << std::setprecision(17) << r.t << ',' << r.macro.rho << ',' << r.macro.u.x() << ',' << r.macro.u.y() << ','
     << r.macro.u.z() << ',' << r.macro.T << ',' << r.m2 << ',' << r.m4 << ',' << r.m6 << ',' << r.S << ',' << r.D
     << ',' << r.min_f << ',' << r.max_f << ',' << r.C1_lo << ',' << r.C2_lo << ',' << r.a_up << ',' << r.c_up << ','
     << r.boundary_mass << ',' << flags_to_string(r.flags) << '\n';
  os.precision(old);
}

}  // namespace bfd
