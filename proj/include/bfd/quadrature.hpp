#pragma once

#include "bfd/grid.hpp"

#include <functional>
#include <vector>

namespace bfd {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch: eigen-decomposition of the Jacobi matrix of the Legendre recurrence.
GaussLegendre gauss_legendre(int n);

/// Integral of fn over [lo, hi] with `panels` equal panels of an `order`-point rule.
double integrate_gl(const std::function<double(double)>& fn, double lo, double hi, int order,
                    int panels = 1);

/// Tensor-product rule on the unit sphere: Gauss-Legendre in cos(theta) about the z-axis
/// times uniform azimuths phi_j = 2*pi*(j + 1/2)/n_phi.
///
/// n_phi must be even so that the node set is closed under sigma -> -sigma; the
/// collision sweeps rely on that to fold antipodal pairs.
class SphereQuadrature {
 public:
  SphereQuadrature() = default;
  SphereQuadrature(int n_theta, int n_phi);

  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return dirs_.size(); }

  const Vec3d& direction(std::size_t k) const noexcept { return dirs_[k]; }
  double weight(std::size_t k) const noexcept { return weights_[k]; }
  std::size_t antipode(std::size_t k) const noexcept { return antipode_[k]; }

  /// One representative per antipodal pair.
  const std::vector<std::size_t>& hemisphere() const noexcept { return hemisphere_; }

  double total_weight() const;

 private:
  int n_theta_ = 0;
  int n_phi_ = 0;
  std::vector<Vec3d> dirs_;
  std::vector<double> weights_;
  std::vector<std::size_t> antipode_;
  std::vector<std::size_t> hemisphere_;
};

}  // namespace bfd
