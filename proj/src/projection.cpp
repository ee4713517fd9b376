#include "bfd/collision_operator.hpp"

#include "bfd/error.hpp"

namespace bfd {

namespace {

// Columns 1, v_x, v_y, v_z, |v|^2 evaluated at every node.
Eigen::Matrix<double, Eigen::Dynamic, 5> invariant_basis(const VelocityGrid& grid) {
  Eigen::Matrix<double, Eigen::Dynamic, 5> psi(static_cast<Eigen::Index>(grid.size()), 5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3d v = grid.node(i);
    psi.row(static_cast<Eigen::Index>(i)) << 1.0, v.x(), v.y(), v.z(), v.squaredNorm();
  }
  return psi;
}

}  // namespace

Eigen::Matrix<double, 5, 1> invariant_moments(const NodeField& q, const VelocityGrid& grid) {
  return invariant_basis(grid).transpose() * q * grid.cell_volume();
}

NodeField conservative_projection(const NodeField& q, const VelocityGrid& grid, const NodeField* weights) {
  if (q.size() != static_cast<Eigen::Index>(grid.size())) {
    throw Error(ErrorCode::GridMismatch, "projection field does not match the grid");
  }
  const auto psi = invariant_basis(grid);
  Eigen::Matrix<double, Eigen::Dynamic, 5> wpsi = psi;
  if (weights) wpsi = weights->asDiagonal() * psi;
  const Eigen::Matrix<double, 5, 5> gram = psi.transpose() * wpsi;
  const Eigen::Matrix<double, 5, 1> defect = psi.transpose() * q;

  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 5, 5>> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < 5) {
    throw Error(ErrorCode::SingularGram, "collision invariants are not resolvable on this grid");
  }
  const Eigen::Matrix<double, 5, 1> lambda = qr.solve(-defect);
  return q + wpsi * lambda;
}

}  // namespace bfd
