#include "bfd/quadrature.hpp"

#include "bfd/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace bfd {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "Gauss-Legendre order must be >= 1");
  GaussLegendre rule;
  if (n == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Constant(1, 2.0);
    return rule;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  rule.nodes = es.eigenvalues();
  rule.weights = 2.0 * es.eigenvectors().row(0).array().square().matrix().transpose();

  // Symmetrize: the exact rule is symmetric about 0, the eigen-solver is only close.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[n - 1 - k] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.weights *= 2.0 / rule.weights.sum();
  return rule;
}

double integrate_gl(const std::function<double(double)>& fn, double lo, double hi, int order,
                    int panels) {
  const GaussLegendre rule = gauss_legendre(order);
  const double width = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double mid = a + 0.5 * width;
    double panel = 0.0;
    for (int k = 0; k < order; ++k) panel += rule.weights[k] * fn(mid + 0.5 * width * rule.nodes[k]);
    sum += 0.5 * width * panel;
  }
  return sum;
}

SphereQuadrature::SphereQuadrature(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 2 || n_phi % 2 != 0) {
    throw Error(ErrorCode::InvalidParameter, "sphere quadrature needs n_theta >= 1 and even n_phi >= 2");
  }
  const GaussLegendre gl = gauss_legendre(n_theta);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  dirs_.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      dirs_.emplace_back(st * std::cos(phi), st * std::sin(phi), ct);
      weights_.push_back(gl.weights[i] * dphi);
    }
  }
  // Node (i, j) has antipode (n_theta-1-i, j + n_phi/2).
  antipode_.resize(dirs_.size());
  for (int i = 0; i < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n_phi + j;
      antipode_[k] = static_cast<std::size_t>(n_theta - 1 - i) * n_phi + (j + n_phi / 2) % n_phi;
    }
  }
  for (std::size_t k = 0; k < dirs_.size(); ++k) {
    if (k < antipode_[k]) hemisphere_.push_back(k);
  }
}

double SphereQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

}  // namespace bfd
