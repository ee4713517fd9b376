#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace bfd {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Vec3d = Vec3<double>;

/// Per-node scalar field on a velocity grid, x-index fastest.
using NodeField = Eigen::VectorXd;

/// Uniform truncated lattice on [-R, R]^3 with n nodes per axis.
///
/// Node (i, j, k) sits at (-R + i*dv, -R + j*dv, -R + k*dv) with dv = 2R/(n-1);
/// its flat index is i + n*(j + n*k). Every node owns a cell of volume dv^3 for
/// the midpoint quadrature, so a constant field integrates to n^3 * dv^3.
class VelocityGrid {
 public:
  VelocityGrid() = default;
  VelocityGrid(int n_per_axis, double radius);

  int n() const noexcept { return n_; }
  double radius() const noexcept { return radius_; }
  double spacing() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_ * n_; }

  double coord(int i) const noexcept { return -radius_ + i * spacing_; }

  std::array<int, 3> unflatten(std::size_t flat) const noexcept {
    const int i = static_cast<int>(flat % n_);
    const int j = static_cast<int>((flat / n_) % n_);
    const int k = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
    return {i, j, k};
  }
  std::size_t flatten(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * (j + static_cast<std::size_t>(n_) * k);
  }

  Vec3d node(std::size_t flat) const noexcept {
    const auto [i, j, k] = unflatten(flat);
    return {coord(i), coord(j), coord(k)};
  }

  /// |v|^2 at every node.
  NodeField speed_squared() const;

  /// Maximum relative speed |v - v*| between any two nodes.
  double max_relative_speed() const noexcept { return 2.0 * std::sqrt(3.0) * radius_; }

  bool operator==(const VelocityGrid& o) const noexcept {
    return n_ == o.n_ && radius_ == o.radius_;
  }

 private:
  int n_ = 0;
  double radius_ = 0.0;
  double spacing_ = 0.0;
};

VelocityGrid build_grid(int n_per_axis, double radius);

/// Occupation numbers f(v) in [0, 1] sampled at the grid nodes.
struct DistributionField {
  VelocityGrid grid;
  NodeField values;

  DistributionField() = default;
  DistributionField(VelocityGrid g, NodeField v);

  static DistributionField zeros(const VelocityGrid& g);
  static DistributionField from_function(const VelocityGrid& g,
                                         const std::function<double(const Vec3d&)>& fn);

  /// Throws invalid-parameter unless every value is finite and in [0, 1].
  void validate() const;
  bool is_admissible() const noexcept;
};

/// Trilinear interpolation in lattice-index coordinates (x = (v + R)/dv).
///
/// Points outside [0, n-1]^3 return `exterior`. Used by every collision
/// evaluation, so it is kept inline.
inline double trilinear_index(const double* values, int n, double x, double y, double z,
                              double exterior = 0.0) noexcept {
  const double hi = n - 1;
  constexpr double slack = 1e-9;
  if (!(x >= -slack && x <= hi + slack && y >= -slack && y <= hi + slack && z >= -slack &&
        z <= hi + slack)) {
    return exterior;
  }
  x = std::clamp(x, 0.0, hi);
  y = std::clamp(y, 0.0, hi);
  z = std::clamp(z, 0.0, hi);
  int i = static_cast<int>(x);
  int j = static_cast<int>(y);
  int k = static_cast<int>(z);
  if (i > n - 2) i = n - 2;
  if (j > n - 2) j = n - 2;
  if (k > n - 2) k = n - 2;
  const double fx = x - i;
  const double fy = y - j;
  const double fz = z - k;
  const std::size_t sy = static_cast<std::size_t>(n);
  const std::size_t sz = sy * n;
  const double* p = values + i + sy * j + sz * k;
  const double c00 = p[0] + fx * (p[1] - p[0]);
  const double c10 = p[sy] + fx * (p[sy + 1] - p[sy]);
  const double c01 = p[sz] + fx * (p[sz + 1] - p[sz]);
  const double c11 = p[sz + sy] + fx * (p[sz + sy + 1] - p[sz + sy]);
  const double c0 = c00 + fy * (c10 - c00);
  const double c1 = c01 + fy * (c11 - c01);
  return c0 + fz * (c1 - c0);
}

/// Occupation at an arbitrary velocity: trilinear inside the box, vacuum outside,
/// clamped to [0, 1].
double sample(const DistributionField& f, const Vec3d& v);

/// Midpoint rule: sum_i f(v_i) weight(v_i) dv^3.
double integrate(const DistributionField& f, const std::function<double(const Vec3d&)>& weight);

/// Midpoint rule for a raw per-node field against a per-node weight.
inline double integrate_nodes(const VelocityGrid& g, const NodeField& values, const NodeField& weight) {
  return values.dot(weight) * g.cell_volume();
}

/// Mass outside |v| > 0.9 R, used as a truncation indicator.
double boundary_mass(const DistributionField& f);

}  // namespace bfd
