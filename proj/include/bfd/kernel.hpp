#pragma once

#include "bfd/grid.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bfd {

/// Angular law b(cos theta): either a constant or a table linear in cos theta.
class AngularLaw {
 public:
  /// Hard-sphere normalization b0 = 1/(4 pi), which gives C_b = 1.
  static constexpr double kDefaultConstant = 0.25 / std::numbers::pi;

  static AngularLaw constant(double b0 = kDefaultConstant);
  /// `cos_theta` strictly increasing from -1 to 1; values must be symmetric under x -> -x.
  static AngularLaw tabulated(std::vector<double> cos_theta, std::vector<double> values);

  bool is_constant() const noexcept { return table_x_.empty(); }
  double constant_value() const noexcept { return b0_; }
  const std::vector<double>& table_cos() const noexcept { return table_x_; }
  const std::vector<double>& table_values() const noexcept { return table_y_; }

  double operator()(double cos_theta) const noexcept;

 private:
  double b0_ = kDefaultConstant;
  std::vector<double> table_x_;
  std::vector<double> table_y_;
};

/// Reads "cos_theta value" lines; '#' starts a comment.
AngularLaw load_angular_table(const std::string& path);

/// B(v - v*, sigma) = min(|v - v*|^gamma, cap) * b(cos theta).
struct CollisionKernel {
  double gamma = 1.0;
  AngularLaw angular = AngularLaw::constant();
  std::optional<double> speed_cap;
  std::optional<double> c_b_lower;  // lower bound of b on theta in [pi/4, 3pi/4]
  std::optional<double> alpha;      // b sin^alpha bounded, alpha < 2

  static CollisionKernel hard_sphere() { return CollisionKernel{}; }

  /// Throws invalid-parameter / nonintegrable-angular on a malformed kernel.
  void validate() const;

  /// min(r^gamma, cap) for the relative speed r >= 0.
  double speed_factor(double r) const noexcept;

  /// True when b is constant (the L-infinity polynomial bound hypothesis).
  bool is_hard_sphere_like() const noexcept { return angular.is_constant(); }
};

double kinetic_factor(const CollisionKernel& kernel, const Vec3d& v, const Vec3d& v_star);

template <typename Scalar>
std::pair<Vec3<Scalar>, Vec3<Scalar>> post_collision_sigma(const Vec3<Scalar>& v,
                                                           const Vec3<Scalar>& v_star,
                                                           const Vec3<Scalar>& sigma) {
  const Vec3<Scalar> center = Scalar(0.5) * (v + v_star);
  const Vec3<Scalar> offset = (Scalar(0.5) * (v - v_star).norm()) * sigma;
  return {center + offset, center - offset};
}

template <typename Scalar>
std::pair<Vec3<Scalar>, Vec3<Scalar>> post_collision_omega(const Vec3<Scalar>& v,
                                                           const Vec3<Scalar>& v_star,
                                                           const Vec3<Scalar>& omega) {
  const Vec3<Scalar> kick = (v_star - v).dot(omega) * omega;
  return {v + kick, v_star - kick};
}

/// cos theta = (v - v*)/|v - v*| . sigma; 1 when v = v*.
double cos_theta_sigma(const Vec3d& v, const Vec3d& v_star, const Vec3d& sigma);

/// h(cos theta_w) = 2 |cos theta_w| b(cos(pi - 2 theta_w)), symmetric in theta_w -> pi - theta_w.
double angular_h(const CollisionKernel& kernel, double cos_theta_omega);

/// C_b = 2 pi int_0^pi b(cos theta) sin theta dtheta.
double compute_Cb(const CollisionKernel& kernel);
/// C_{b,2} = 2 pi int_0^pi b(cos theta) sin^3 theta dtheta.
double compute_Cb2(const CollisionKernel& kernel);
/// Mass of b on the two polar caps theta < eps and theta > pi - eps.
double varphi(const CollisionKernel& kernel, double eps);

}  // namespace bfd
