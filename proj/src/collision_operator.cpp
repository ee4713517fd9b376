#include "bfd/collision_operator.hpp"

#include "bfd/error.hpp"
#include "bfd/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace bfd {

namespace {

// Trilinear stencil for points b + r, b a lattice node and r a fixed offset (index units).
// An axis with zero fractional part reads one node (step 0), so boundary nodes stay in range.
struct Stencil {
  std::array<int, 3> off{};
  std::array<double, 3> frac{};
  std::array<std::size_t, 3> step{};
  std::array<int, 3> lo{};  // b-range per axis keeping the stencil inside the box
  std::array<int, 3> hi{};

  Stencil(const Vec3d& r, int n) {
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n), static_cast<std::size_t>(n) * n};
    for (int ax = 0; ax < 3; ++ax) {
      double fl = std::floor(r[ax]);
      double fr = r[ax] - fl;
      if (fr > 1.0 - 1e-12) {
        fl += 1.0;
        fr = 0.0;
      } else if (fr < 1e-12) {
        fr = 0.0;
      }
      off[ax] = static_cast<int>(fl);
      frac[ax] = fr;
      step[ax] = fr == 0.0 ? 0 : stride[ax];
      lo[ax] = -off[ax];
      hi[ax] = (n - 1) - off[ax] - (fr == 0.0 ? 0 : 1);
    }
  }
};

// Shared precomputation for the pair sweeps.
struct SweepSetup {
  int n = 0;
  std::size_t nodes = 0;
  std::vector<double> kin;   // speed factor * dv^3, indexed by |d|^2 in lattice units
  std::vector<Vec3d> dirs;   // sigma nodes in use
  std::vector<double> weights;  // their weights (folded when antipodes merge)
  const AngularLaw* angular = nullptr;
  std::vector<std::array<int, 3>> offsets;  // one offset d per unordered pair class
  std::vector<std::size_t> block_bounds;    // offsets[block_bounds[i], block_bounds[i+1]) per block

  SweepSetup(const VelocityGrid& g, const CollisionKernel& kernel, const SphereQuadrature& quad, bool fold) {
    n = g.n();
    nodes = g.size();
    const int max_d2 = 3 * (n - 1) * (n - 1);
    kin.resize(static_cast<std::size_t>(max_d2) + 1);
    for (int d2 = 0; d2 <= max_d2; ++d2) {
      kin[d2] = kernel.speed_factor(g.spacing() * std::sqrt(static_cast<double>(d2))) * g.cell_volume();
    }
    if (fold) {
      for (std::size_t k : quad.hemisphere()) {
        dirs.push_back(quad.direction(k));
        weights.push_back(quad.weight(k) + quad.weight(quad.antipode(k)));
      }
    } else {
      for (std::size_t k = 0; k < quad.size(); ++k) {
        dirs.push_back(quad.direction(k));
        weights.push_back(quad.weight(k));
      }
    }
    angular = &kernel.angular;

    // Half of the offset lattice: d = 0 and every d lexicographically positive in (z, y, x).
    std::vector<double> work;
    for (int dz = 0; dz < n; ++dz) {
      for (int dy = (dz == 0 ? 0 : -(n - 1)); dy < n; ++dy) {
        for (int dx = (dz == 0 && dy == 0 ? 0 : -(n - 1)); dx < n; ++dx) {
          offsets.push_back({dx, dy, dz});
          work.push_back(static_cast<double>(n - std::abs(dx)) * (n - std::abs(dy)) * (n - std::abs(dz)));
        }
      }
    }
    double total = 0.0;
    for (double w : work) total += w;
    constexpr std::size_t kBlocks = 64;
    block_bounds.push_back(0);
    double acc = 0.0;
    std::size_t next = 1;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      acc += work[i];
      if (next < kBlocks && acc >= total * static_cast<double>(next) / kBlocks) {
        block_bounds.push_back(i + 1);
        ++next;
      }
    }
    if (block_bounds.back() != offsets.size()) block_bounds.push_back(offsets.size());
  }

  std::size_t blocks() const { return block_bounds.size() - 1; }
};

// Per offset d: the stencils of b + d/2 +- |d|/2 sigma_k and the angular weights w_k b(cos theta_k).
struct OffsetGeometry {
  std::vector<Stencil> plus, minus;
  std::vector<double> w;

  void build(const SweepSetup& s, const std::array<int, 3>& d) {
    plus.clear();
    minus.clear();
    w.clear();
    const Vec3d dv(d[0], d[1], d[2]);
    const double norm_d = dv.norm();
    const Vec3d mid = 0.5 * dv;
    for (std::size_t k = 0; k < s.dirs.size(); ++k) {
      const Vec3d o = (0.5 * norm_d) * s.dirs[k];
      plus.emplace_back(mid + o, s.n);
      minus.emplace_back(mid - o, s.n);
      const double c = norm_d > 0.0 ? dv.dot(s.dirs[k]) / norm_d : 1.0;
      w.push_back(s.weights[k] * (*s.angular)(c));
    }
  }
};

// Samples of one stencil along the lattice row (y, z), x in [x0, x1], into out[x - x0].
inline void sample_row(const Stencil& st, const double* F, double exterior, int n, int y, int z, int x0, int x1,
                       double* out) {
  const std::size_t sy = static_cast<std::size_t>(n);
  const std::size_t sz = sy * n;
  if (y < st.lo[1] || y > st.hi[1] || z < st.lo[2] || z > st.hi[2]) {
    std::fill(out, out + (x1 - x0 + 1), exterior);
    return;
  }
  const int in0 = std::max(x0, st.lo[0]);
  const int in1 = std::min(x1, st.hi[0]);
  for (int x = x0; x < std::min(in0, x1 + 1); ++x) out[x - x0] = exterior;
  for (int x = std::max(in1 + 1, x0); x <= x1; ++x) out[x - x0] = exterior;
  if (in0 > in1) return;
  const double* row = F + sy * (y + st.off[1]) + sz * (z + st.off[2]) + st.off[0];
  const std::size_t sx = st.step[0], syy = st.step[1], szz = st.step[2];
  const double fx = st.frac[0], fy = st.frac[1], fz = st.frac[2];
  for (int x = in0; x <= in1; ++x) {
    const double* p = row + x;
    const double c00 = p[0] + fx * (p[sx] - p[0]);
    const double c10 = p[syy] + fx * (p[syy + sx] - p[syy]);
    const double c01 = p[szz] + fx * (p[szz + sx] - p[szz]);
    const double c11 = p[szz + syy] + fx * (p[szz + syy + sx] - p[szz + syy]);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    out[x - x0] = c0 + fz * (c1 - c0);
  }
}

// One lattice row of pairs: b = (x, y, z) for x in [x0, x1] and a = b + d. Row k of s1
// (s2) holds the samples at the first (second) post-collision velocity for sigma_k.
struct PairRow {
  std::size_t b0 = 0;  // flat index of b at x = x0
  long dflat = 0;      // a - b
  int count = 0;
  double kin = 0.0;
  const double* w = nullptr;
  std::size_t ns = 0;
  double* s1 = nullptr;
  double* s2 = nullptr;
  std::size_t ld = 0;  // leading dimension of s1, s2
};

// Visits every unordered node pair {a, b} once, a row of pairs at a time.
template <typename Body>
void for_each_pair_row(const SweepSetup& s, std::size_t block, const double* F1, double e1, const double* F2,
                       double e2, Body&& body) {
  const int n = s.n;
  const std::size_t sy = static_cast<std::size_t>(n);
  const std::size_t sz = sy * n;
  const std::size_t ns = s.dirs.size();
  OffsetGeometry geo;
  std::vector<double> s1(ns * n), s2(ns * n);
  for (std::size_t oi = s.block_bounds[block]; oi < s.block_bounds[block + 1]; ++oi) {
    const auto& d = s.offsets[oi];
    const int d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const double kin = s.kin[d2];
    if (kin == 0.0) continue;
    geo.build(s, d);
    const int x0 = std::max(0, -d[0]), x1 = std::min(n - 1, n - 1 - d[0]);
    const int y0 = std::max(0, -d[1]), y1 = std::min(n - 1, n - 1 - d[1]);
    const int z0 = std::max(0, -d[2]), z1 = std::min(n - 1, n - 1 - d[2]);
    PairRow row;
    row.dflat = d[0] + static_cast<long>(sy) * d[1] + static_cast<long>(sz) * d[2];
    row.count = x1 - x0 + 1;
    row.kin = kin;
    row.w = geo.w.data();
    row.ns = ns;
    row.s1 = s1.data();
    row.s2 = s2.data();
    row.ld = static_cast<std::size_t>(n);
    for (int z = z0; z <= z1; ++z) {
      for (int y = y0; y <= y1; ++y) {
        for (std::size_t k = 0; k < ns; ++k) {
          sample_row(geo.plus[k], F1, e1, n, y, z, x0, x1, s1.data() + k * n);
          sample_row(geo.minus[k], F2, e2, n, y, z, x0, x1, s2.data() + k * n);
        }
        row.b0 = static_cast<std::size_t>(x0) + sy * y + sz * z;
        body(row);
      }
    }
  }
}

// Ordered pairwise reduction of per-block buffers into buffers[0].
void pairwise_reduce(std::vector<NodeField>& buffers) {
  for (std::size_t stride = 1; stride < buffers.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < buffers.size(); i += 2 * stride) buffers[i] += buffers[i + stride];
  }
}

}  // namespace

CollisionSweep eval_collision_sweep(const DistributionField& f, const CollisionKernel& kernel,
                                    const SphereQuadrature& quad, bool with_production) {
  const VelocityGrid& g = f.grid;
  const SweepSetup setup(g, kernel, quad, /*fold=*/true);
  const double* F = f.values.data();
  const std::size_t blocks = setup.blocks();
  const Eigen::Index len = static_cast<Eigen::Index>(setup.nodes);

  std::vector<NodeField> gain(blocks, NodeField::Zero(len));
  std::vector<NodeField> freq(blocks, NodeField::Zero(len));
  std::vector<NodeField> prod(with_production ? blocks : 0, NodeField::Zero(len));
  std::vector<char> saturated(blocks, 0);

  parallel_for(blocks, [&](std::size_t blk) {
    double* G = gain[blk].data();
    double* L = freq[blk].data();
    double* P = with_production ? prod[blk].data() : nullptr;
    bool sat = false;
    std::vector<double> sp(setup.n), sm(setup.n), sd(setup.n);
    // Production runs sample the exterior as NaN to spot collisions leaving the box; those
    // are vacuum (0) for the rates and carry no entropy production.
    const double exterior = P ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    std::vector<char> outside(P ? setup.dirs.size() * setup.n : 0);
    for_each_pair_row(setup, blk, F, exterior, F, exterior, [&](const PairRow& r) {
      const int m = r.count;
      if (P) {
        for (std::size_t k = 0; k < r.ns; ++k) {
          double* p = r.s1 + k * r.ld;
          double* q = r.s2 + k * r.ld;
          char* o = outside.data() + k * r.ld;
          for (int i = 0; i < m; ++i) {
            o[i] = std::isnan(p[i]) || std::isnan(q[i]);
            if (std::isnan(p[i])) p[i] = 0.0;
            if (std::isnan(q[i])) q[i] = 0.0;
          }
        }
      }
      std::fill(sp.begin(), sp.begin() + m, 0.0);
      std::fill(sm.begin(), sm.begin() + m, 0.0);
      for (std::size_t k = 0; k < r.ns; ++k) {
        const double wk = r.w[k];
        const double* p = r.s1 + k * r.ld;
        const double* q = r.s2 + k * r.ld;
        for (int i = 0; i < m; ++i) {
          sp[i] += wk * (p[i] * q[i]);
          sm[i] += wk * ((1.0 - p[i]) * (1.0 - q[i]));
        }
      }
      if (P) {
        std::fill(sd.begin(), sd.begin() + m, 0.0);
        for (std::size_t k = 0; k < r.ns; ++k) {
          const double wk = r.w[k];
          const double* p = r.s1 + k * r.ld;
          const double* q = r.s2 + k * r.ld;
          const char* o = outside.data() + k * r.ld;
          for (int i = 0; i < m; ++i) {
            if (o[i]) continue;
            const std::size_t b = r.b0 + i;
            const std::size_t a = static_cast<std::size_t>(static_cast<long>(b) + r.dflat);
            const double blocked = (1.0 - F[a]) * (1.0 - F[b]);
            const double occupied = F[a] * F[b];
            sd[i] += wk * entropy_gamma(p[i] * q[i] * blocked, occupied * ((1.0 - p[i]) * (1.0 - q[i])), sat);
          }
        }
      }
      for (int i = 0; i < m; ++i) {
        const std::size_t b = r.b0 + i;
        const std::size_t a = static_cast<std::size_t>(static_cast<long>(b) + r.dflat);
        const double fa = F[a], fb = F[b];
        const double gp = r.kin * sp[i];
        const double gm = r.kin * sm[i];
        G[a] += gp * (1.0 - fb);
        L[a] += gp * (1.0 - fb) + gm * fb;
        if (P) P[a] += 0.25 * r.kin * sd[i];
        if (b != a) {
          G[b] += gp * (1.0 - fa);
          L[b] += gp * (1.0 - fa) + gm * fa;
          if (P) P[b] += 0.25 * r.kin * sd[i];
        }
      }
    });
    saturated[blk] = sat ? 1 : 0;
  });

  pairwise_reduce(gain);
  pairwise_reduce(freq);
  CollisionSweep out;
  out.rates.gain = std::move(gain[0]);
  out.rates.total_freq = std::move(freq[0]);
  out.rates.q_fd = out.rates.gain - f.values.cwiseProduct(out.rates.total_freq);
  if (with_production) {
    pairwise_reduce(prod);
    out.production.density = std::move(prod[0]);
    out.production.total = out.production.density.sum() * g.cell_volume();
    for (char s : saturated) out.production.saturated = out.production.saturated || s;
  }
  return out;
}

CollisionRates eval_rates(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad) {
  return eval_collision_sweep(f, kernel, quad, false).rates;
}

NodeField eval_QFD(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad) {
  return eval_rates(f, kernel, quad).q_fd;
}

NodeField eval_Q1(const VelocityGrid& g, const Operand& f1, const Operand& f2, const Operand& f3,
                  const CollisionKernel& kernel, const SphereQuadrature& quad) {
  const Eigen::Index len = static_cast<Eigen::Index>(g.size());
  if (f1.values.size() != len || f2.values.size() != len || f3.values.size() != len) {
    throw Error(ErrorCode::GridMismatch, "Q1 operands do not match the grid");
  }
  // sigma -> -sigma swaps f1 and f2; folding is exact only when they coincide.
  const bool fold = f1.exterior == f2.exterior && f1.values == f2.values;
  const SweepSetup setup(g, kernel, quad, fold);
  const double* F3 = f3.values.data();
  const std::size_t blocks = setup.blocks();
  std::vector<NodeField> acc(blocks, NodeField::Zero(len));

  parallel_for(blocks, [&](std::size_t blk) {
    double* A = acc[blk].data();
    std::vector<double> sp(setup.n);
    for_each_pair_row(setup, blk, f1.values.data(), f1.exterior, f2.values.data(), f2.exterior,
                      [&](const PairRow& r) {
                        const int m = r.count;
                        std::fill(sp.begin(), sp.begin() + m, 0.0);
                        for (std::size_t k = 0; k < r.ns; ++k) {
                          const double wk = r.w[k];
                          const double* p = r.s1 + k * r.ld;
                          const double* q = r.s2 + k * r.ld;
                          for (int i = 0; i < m; ++i) sp[i] += wk * (p[i] * q[i]);
                        }
                        for (int i = 0; i < m; ++i) {
                          const std::size_t b = r.b0 + i;
                          const std::size_t a = static_cast<std::size_t>(static_cast<long>(b) + r.dflat);
                          const double v = r.kin * sp[i];
                          A[a] += v * F3[b];
                          if (b != a) A[b] += v * F3[a];
                        }
                      });
  });
  pairwise_reduce(acc);
  return std::move(acc[0]);
}

NodeField eval_Qbar1(const DistributionField& f, const CollisionKernel& kernel, const SphereQuadrature& quad) {
  return eval_rates(f, kernel, quad).total_freq;
}

GainLossSplit eval_gain_loss_split(const DistributionField& f, const CollisionKernel& kernel,
                                   const SphereQuadrature& quad) {
  const Operand occ = Operand::occupation(f);
  const Operand comp = Operand::complement(f);
  GainLossSplit out;
  // Q_FD^+(v) = (1 - f(v)) Q1(f, f, 1-f)(v); L_FD = Q1(1-f, 1-f, f).
  out.gain = comp.values.cwiseProduct(eval_Q1(f.grid, occ, occ, comp, kernel, quad));
  out.loss_freq = eval_Q1(f.grid, comp, comp, occ, kernel, quad);
  return out;
}

NodeField eval_Qc_gain_direct(const DistributionField& f, const DistributionField& g,
                              const CollisionKernel& kernel, const SphereQuadrature& quad) {
  if (!(f.grid == g.grid)) throw Error(ErrorCode::GridMismatch, "Q_c^+ operands live on different grids");
  return eval_Q1(f.grid, Operand::occupation(f), Operand::occupation(g), Operand::constant(f.grid, 1.0), kernel,
                 quad);
}

NodeField eval_Qc_loss(const DistributionField& f, const DistributionField& g, const CollisionKernel& kernel,
                       const SphereQuadrature& quad) {
  if (!(f.grid == g.grid)) throw Error(ErrorCode::GridMismatch, "Q_c^- operands live on different grids");
  // f(v) Q1(1, 1, g)(v) with the constant operand extended by 1 outside the box.
  const Operand one = Operand::constant(f.grid, 1.0);
  return f.values.cwiseProduct(eval_Q1(f.grid, one, one, Operand::occupation(g), kernel, quad));
}

}  // namespace bfd
