#include "bfd/collision_operator.hpp"

#include "bfd/error.hpp"
#include "bfd/parallel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace bfd {

std::pair<Vec3d, Vec3d> plane_basis(const Vec3d& n) {
  Eigen::Index axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Vec3d seed = Vec3d::Unit(axis);
  const Vec3d e1 = n.cross(seed).normalized();
  const Vec3d e2 = n.cross(e1);
  return {e1, e2};
}

namespace {

NodeField carleman_generic(const DistributionField& f, const DistributionField& g, const CollisionKernel& kernel) {
  const VelocityGrid& grid = f.grid;
  const int n = grid.n();
  const double dv = grid.spacing();
  const double hi = n - 1;
  const double mid = 0.5 * hi;
  const Vec3d origin(mid, mid, mid);  // v = 0 in index coordinates
  const int i_max = static_cast<int>(std::ceil(std::sqrt(3.0) * mid)) + 1;
  const double* G = g.values.data();
  const std::size_t nodes = grid.size();
  // dv^3 (outer cell) * dv^2 (plane cell) / dv^2 (the |v' - v|^-2 factor in index units).
  const double cell = dv * dv * dv;
  constexpr double eps = 1e-9;

  NodeField out = NodeField::Zero(static_cast<Eigen::Index>(nodes));
  parallel_for(nodes, [&](std::size_t a) {
    const auto ia = grid.unflatten(a);
    const Vec3d va(ia[0], ia[1], ia[2]);
    double acc = 0.0;
    for (std::size_t b = 0; b < nodes; ++b) {
      if (b == a) continue;
      const double fb = f.values[b];
      if (fb == 0.0) continue;
      const auto ib = grid.unflatten(b);
      const Vec3d d(ib[0] - ia[0], ib[1] - ia[1], ib[2] - ia[2]);
      const double d2 = d.squaredNorm();
      const double dn = std::sqrt(d2);
      const Vec3d e = d / dn;
      const auto [e1, e2] = plane_basis(e);
      const Vec3d p0 = origin + (va - origin).dot(e) * e;
      double plane = 0.0;
      for (int i = -i_max; i <= i_max; ++i) {
        const Vec3d row = p0 + static_cast<double>(i) * e1;
        double jlo = -1e300, jhi = 1e300;
        bool empty = false;
        for (int k = 0; k < 3 && !empty; ++k) {
          if (std::abs(e2[k]) < 1e-14) {
            if (row[k] < -eps || row[k] > hi + eps) empty = true;
            continue;
          }
          double lo = (0.0 - row[k]) / e2[k];
          double up = (hi - row[k]) / e2[k];
          if (lo > up) std::swap(lo, up);
          jlo = std::max(jlo, lo);
          jhi = std::min(jhi, up);
        }
        if (empty) continue;
        const int j0 = static_cast<int>(std::ceil(jlo - eps));
        const int j1 = static_cast<int>(std::floor(jhi + eps));
        for (int j = j0; j <= j1; ++j) {
          const Vec3d q = row + static_cast<double>(j) * e2;
          const double gq = trilinear_index(G, n, q.x(), q.y(), q.z());
          if (gq == 0.0) continue;
          const double w2 = (q - va).squaredNorm();
          const double u2 = d2 + w2;
          const double cos_w = dn / std::sqrt(u2);
          const double cos_theta = 1.0 - 2.0 * cos_w * cos_w;
          plane += kernel.speed_factor(dv * std::sqrt(u2)) * 4.0 * cos_w * kernel.angular(cos_theta) * gq;
        }
      }
      acc += fb * plane / d2;
    }
    out[a] = cell * acc;
  });
  return out;
}

// Lattice points of the plane {x : x.e = origin.e + s} clipped to the box [0, n-1]^3,
// centred at the plane point closest to the origin, summed against g.
double plane_sum(const double* G, int n, const Vec3d& origin, const Vec3d& e, const Vec3d& e1, const Vec3d& e2,
                 double s, int i_max) {
  constexpr double eps = 1e-9;
  const double hi = n - 1;
  const Vec3d p0 = origin + s * e;
  double sum = 0.0;
  for (int i = -i_max; i <= i_max; ++i) {
    const Vec3d row = p0 + static_cast<double>(i) * e1;
    double jlo = -1e300, jhi = 1e300;
    bool empty = false;
    for (int k = 0; k < 3 && !empty; ++k) {
      if (std::abs(e2[k]) < 1e-14) {
        if (row[k] < -eps || row[k] > hi + eps) empty = true;
        continue;
      }
      double lo = (0.0 - row[k]) / e2[k];
      double up = (hi - row[k]) / e2[k];
      if (lo > up) std::swap(lo, up);
      jlo = std::max(jlo, lo);
      jhi = std::min(jhi, up);
    }
    if (empty) continue;
    const int j0 = static_cast<int>(std::ceil(jlo - eps));
    const int j1 = static_cast<int>(std::floor(jhi + eps));
    for (int j = j0; j <= j1; ++j) {
      const Vec3d q = row + static_cast<double>(j) * e2;
      sum += trilinear_index(G, n, q.x(), q.y(), q.z());
    }
  }
  return sum;
}

// gamma = 1, constant b, no cap: the plane weight 4 b dv |v' - v| is constant on each
// plane, so a plane sum is shared by every pair (v, v') whose plane it is. Planes are
// enumerated per primitive lattice direction m and offset v.m.
NodeField carleman_hard_sphere(const DistributionField& f, const DistributionField& g, double b0) {
  const VelocityGrid& grid = f.grid;
  const int n = grid.n();
  const double dv = grid.spacing();
  const double mid = 0.5 * (n - 1);
  const Vec3d origin(mid, mid, mid);
  const int i_max = static_cast<int>(std::ceil(std::sqrt(3.0) * mid)) + 1;
  const double* G = g.values.data();
  const double* F = f.values.data();
  const std::size_t nodes = grid.size();

  std::vector<std::array<int, 3>> dirs;
  for (int z = 0; z < n; ++z) {
    for (int y = (z == 0 ? 0 : -(n - 1)); y < n; ++y) {
      for (int x = (z == 0 && y == 0 ? 1 : -(n - 1)); x < n; ++x) {
        if (std::gcd(std::gcd(std::abs(x), std::abs(y)), std::abs(z)) == 1) dirs.push_back({x, y, z});
      }
    }
  }
  constexpr std::size_t kBlocks = 64;
  const std::size_t blocks = std::min(kBlocks, dirs.size());
  std::vector<NodeField> acc(blocks, NodeField::Zero(static_cast<Eigen::Index>(nodes)));
  const double scale = grid.cell_volume() * 4.0 * b0 * dv;

  parallel_for(blocks, [&](std::size_t blk) {
    double* A = acc[blk].data();
    std::vector<double> planes;
    for (std::size_t di = blk; di < dirs.size(); di += blocks) {
      const auto& m = dirs[di];
      const Vec3d mv(m[0], m[1], m[2]);
      const double mnorm = mv.norm();
      const Vec3d e = mv / mnorm;
      const auto [e1, e2] = plane_basis(e);
      // i.m over the box spans [lo, hi]; the plane through node i has s = (i.m - o.m) / |m|.
      const int lo = (n - 1) * (std::min(m[0], 0) + std::min(m[1], 0) + std::min(m[2], 0));
      const int hi = (n - 1) * (std::max(m[0], 0) + std::max(m[1], 0) + std::max(m[2], 0));
      const double om = origin.dot(mv);
      planes.assign(static_cast<std::size_t>(hi - lo + 1), std::numeric_limits<double>::quiet_NaN());
      for (std::size_t a = 0; a < nodes; ++a) {
        const auto ia = grid.unflatten(a);
        const int key = ia[0] * m[0] + ia[1] * m[1] + ia[2] * m[2];
        double& plane = planes[static_cast<std::size_t>(key - lo)];
        if (std::isnan(plane)) plane = plane_sum(G, n, origin, e, e1, e2, (key - om) / mnorm, i_max);
        if (plane == 0.0) continue;
        double sum = 0.0;
        for (int sign : {1, -1}) {
          for (int t = 1;; ++t) {
            const int x = ia[0] + sign * t * m[0], y = ia[1] + sign * t * m[1], z = ia[2] + sign * t * m[2];
            if (x < 0 || x >= n || y < 0 || y >= n || z < 0 || z >= n) break;
            sum += F[grid.flatten(x, y, z)] / t;
          }
        }
        A[a] += scale * sum * plane / mnorm;
      }
    }
  });
  for (std::size_t stride = 1; stride < acc.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < acc.size(); i += 2 * stride) acc[i] += acc[i + stride];
  }
  return std::move(acc[0]);
}

}  // namespace

NodeField eval_Qc_gain_carleman(const DistributionField& f, const DistributionField& g,
                                const CollisionKernel& kernel) {
  if (!(f.grid == g.grid)) throw Error(ErrorCode::GridMismatch, "Carleman operands live on different grids");
  if (kernel.gamma == 1.0 && kernel.angular.is_constant() && !kernel.speed_cap) {
    return carleman_hard_sphere(f, g, kernel.angular.constant_value());
  }
  return carleman_generic(f, g, kernel);
}

}  // namespace bfd
