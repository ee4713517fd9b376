#include "bfd/kernel.hpp"

#include "bfd/error.hpp"
#include "bfd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bfd {

namespace {

constexpr int kAngularOrder = 16;

// Integral of g(x) b(x) over [lo, hi] in x = cos theta. Tables are integrated
// panel-by-panel so linear pieces are exact; the result is checked against a
// refined pass to catch laws the rule cannot resolve.
double integrate_angular(const AngularLaw& b, double lo, double hi,
                         const std::function<double(double)>& g) {
  auto integrand = [&](double x) { return b(x) * g(x); };
  if (hi <= lo) return 0.0;
  auto pass = [&](int split) {
    if (b.is_constant()) return integrate_gl(integrand, lo, hi, 64, split);
    double sum = 0.0;
    const auto& xs = b.table_cos();
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double a = std::max(lo, xs[i]);
      const double c = std::min(hi, xs[i + 1]);
      if (c > a) sum += integrate_gl(integrand, a, c, kAngularOrder, split);
    }
    return sum;
  };
  const double coarse = pass(1);
  const double fine = pass(2);
  if (!std::isfinite(coarse) || !std::isfinite(fine) ||
      std::abs(fine - coarse) > 1e-8 * std::max(1.0, std::abs(fine))) {
    throw Error(ErrorCode::NonintegrableAngular, "angular law not resolved by the quadrature");
  }
  return fine;
}

}  // namespace

AngularLaw AngularLaw::constant(double b0) {
  if (!(b0 > 0.0) || !std::isfinite(b0)) {
    throw Error(ErrorCode::InvalidParameter, "constant angular law must be positive and finite");
  }
  AngularLaw law;
  law.b0_ = b0;
  return law;
}

AngularLaw AngularLaw::tabulated(std::vector<double> cos_theta, std::vector<double> values) {
  if (cos_theta.size() != values.size() || cos_theta.size() < 2) {
    throw Error(ErrorCode::InvalidParameter, "angular table needs >= 2 matching rows");
  }
  for (std::size_t i = 0; i + 1 < cos_theta.size(); ++i) {
    if (!(cos_theta[i + 1] > cos_theta[i])) {
      throw Error(ErrorCode::InvalidParameter, "angular table cos(theta) must be strictly increasing");
    }
  }
  constexpr double tol = 1e-12;
  if (std::abs(cos_theta.front() + 1.0) > tol || std::abs(cos_theta.back() - 1.0) > tol) {
    throw Error(ErrorCode::InvalidParameter, "angular table must cover [-1, 1]");
  }
  for (double y : values) {
    if (!std::isfinite(y)) {
      throw Error(ErrorCode::NonintegrableAngular, "angular table contains a non-finite value");
    }
    if (y < 0.0) throw Error(ErrorCode::InvalidParameter, "angular table values must be >= 0");
  }
  AngularLaw law;
  law.b0_ = 0.0;
  law.table_x_ = std::move(cos_theta);
  law.table_y_ = std::move(values);
  // b(cos(pi - theta)) = b(cos theta), checked at every tabulated abscissa.
  for (std::size_t i = 0; i < law.table_x_.size(); ++i) {
    const double here = law.table_y_[i];
    const double mirror = law(-law.table_x_[i]);
    if (std::abs(here - mirror) > 1e-9 * std::max(1.0, std::abs(here))) {
      throw Error(ErrorCode::InvalidParameter, "angular table is not symmetric under theta -> pi - theta");
    }
  }
  return law;
}

double AngularLaw::operator()(double x) const noexcept {
  if (table_x_.empty()) return b0_;
  x = std::clamp(x, -1.0, 1.0);
  auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - table_x_.begin());
  if (hi >= table_x_.size()) hi = table_x_.size() - 1;
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  const double t = (x - table_x_[lo]) / (table_x_[hi] - table_x_[lo]);
  return table_y_[lo] + t * (table_y_[hi] - table_y_[lo]);
}

AngularLaw load_angular_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open angular table " + path);
  std::vector<double> xs, ys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double x, y;
    if (!(row >> x)) continue;
    if (!(row >> y)) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected 'cos_theta value'");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return AngularLaw::tabulated(std::move(xs), std::move(ys));
}

void CollisionKernel::validate() const {
  if (!(gamma >= 0.0 && gamma <= 2.0)) {
    throw Error(ErrorCode::InvalidParameter, "kernel.gamma must lie in [0, 2]");
  }
  if (speed_cap && !(*speed_cap > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "kernel.speed_cap must be positive");
  }
  if (alpha && !(*alpha < 2.0)) {
    throw Error(ErrorCode::InvalidParameter, "kernel.alpha must be < 2");
  }
  const double cb = compute_Cb(*this);
  if (!(cb > 0.0) || !std::isfinite(cb)) {
    throw Error(ErrorCode::NonintegrableAngular, "C_b must be positive and finite");
  }
  if (c_b_lower) {
    // (H2) is metadata; flag a declared bound the law itself violates.
    const double step = 0.5 * std::numbers::pi / 64;
    for (int k = 0; k <= 64; ++k) {
      const double theta = 0.25 * std::numbers::pi + k * step;
      if (angular(std::cos(theta)) < *c_b_lower) {
        throw Error(ErrorCode::InvalidParameter, "angular law falls below kernel.c_b_lower near pi/2");
      }
    }
  }
}

double CollisionKernel::speed_factor(double r) const noexcept {
  const double base = gamma == 0.0 ? 1.0 : std::pow(r, gamma);
  return speed_cap ? std::min(base, *speed_cap) : base;
}

double kinetic_factor(const CollisionKernel& kernel, const Vec3d& v, const Vec3d& v_star) {
  return kernel.speed_factor((v - v_star).norm());
}

double cos_theta_sigma(const Vec3d& v, const Vec3d& v_star, const Vec3d& sigma) {
  const Vec3d rel = v - v_star;
  const double r = rel.norm();
  if (r == 0.0) return 1.0;
  return std::clamp(rel.dot(sigma) / r, -1.0, 1.0);
}

double angular_h(const CollisionKernel& kernel, double cos_theta_omega) {
  const double c = std::clamp(cos_theta_omega, -1.0, 1.0);
  // cos(pi - 2 theta_w) = 1 - 2 cos^2(theta_w)
  return 2.0 * std::abs(c) * kernel.angular(1.0 - 2.0 * c * c);
}

double compute_Cb(const CollisionKernel& kernel) {
  return 2.0 * std::numbers::pi * integrate_angular(kernel.angular, -1.0, 1.0, [](double) { return 1.0; });
}

double compute_Cb2(const CollisionKernel& kernel) {
  return 2.0 * std::numbers::pi *
         integrate_angular(kernel.angular, -1.0, 1.0, [](double x) { return 1.0 - x * x; });
}

double varphi(const CollisionKernel& kernel, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidParameter, "varphi needs 0 < eps < 1");
  const double ce = std::cos(eps);
  auto one = [](double) { return 1.0; };
  return 2.0 * std::numbers::pi *
         (integrate_angular(kernel.angular, ce, 1.0, one) + integrate_angular(kernel.angular, -1.0, -ce, one));
}

}  // namespace bfd
