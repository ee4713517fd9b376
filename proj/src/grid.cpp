#include "bfd/grid.hpp"

#include "bfd/error.hpp"

#include <string>

namespace bfd {

VelocityGrid::VelocityGrid(int n_per_axis, double radius) {
  if (n_per_axis < 4) {
    throw Error(ErrorCode::InvalidParameter,
                "grid needs at least 4 nodes per axis, got " + std::to_string(n_per_axis));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidParameter, "grid radius must be positive and finite");
  }
  n_ = n_per_axis;
  radius_ = radius;
  spacing_ = 2.0 * radius / (n_per_axis - 1);
}

VelocityGrid build_grid(int n_per_axis, double radius) { return VelocityGrid(n_per_axis, radius); }

NodeField VelocityGrid::speed_squared() const {
  NodeField out(size());
  for (std::size_t a = 0; a < size(); ++a) out[a] = node(a).squaredNorm();
  return out;
}

DistributionField::DistributionField(VelocityGrid g, NodeField v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw Error(ErrorCode::InvalidParameter, "field size does not match grid");
  }
}

DistributionField DistributionField::zeros(const VelocityGrid& g) {
  return DistributionField(g, NodeField::Zero(static_cast<Eigen::Index>(g.size())));
}

DistributionField DistributionField::from_function(const VelocityGrid& g,
                                                   const std::function<double(const Vec3d&)>& fn) {
  NodeField v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t a = 0; a < g.size(); ++a) v[a] = fn(g.node(a));
  return DistributionField(g, std::move(v));
}

bool DistributionField::is_admissible() const noexcept {
  for (Eigen::Index a = 0; a < values.size(); ++a) {
    const double x = values[a];
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
  }
  return true;
}

void DistributionField::validate() const {
  for (Eigen::Index a = 0; a < values.size(); ++a) {
    const double x = values[a];
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw Error(ErrorCode::InvalidParameter,
                  "occupation at node " + std::to_string(a) + " is " + std::to_string(x) +
                      ", outside [0, 1]");
    }
  }
}

double sample(const DistributionField& f, const Vec3d& v) {
  const auto& g = f.grid;
  const double inv = 1.0 / g.spacing();
  const double r = g.radius();
  const double s = trilinear_index(f.values.data(), g.n(), (v.x() + r) * inv, (v.y() + r) * inv,
                                   (v.z() + r) * inv, 0.0);
  return std::clamp(s, 0.0, 1.0);
}

double integrate(const DistributionField& f, const std::function<double(const Vec3d&)>& weight) {
  const auto& g = f.grid;
  double sum = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) sum += f.values[a] * weight(g.node(a));
  return sum * g.cell_volume();
}

double boundary_mass(const DistributionField& f) {
  const double cut = 0.9 * f.grid.radius();
  return integrate(f, [cut](const Vec3d& v) { return v.norm() > cut ? 1.0 : 0.0; });
}

}  // namespace bfd
