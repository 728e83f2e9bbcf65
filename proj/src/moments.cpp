#include "ifit/moments.hpp"

#include <vector>

#include "ifit/format.hpp"
#include "ifit/parallel.hpp"
#include "ifit/quadrature.hpp"

namespace ifit {

namespace {

std::vector<std::size_t> shape_of(const Grid& grid) {
  std::vector<std::size_t> s(grid.dim());
  for (std::size_t k = 0; k < grid.dim(); ++k) s[k] = static_cast<std::size_t>(grid.counts()[k]);
  return s;
}

// Odometer over `order`^n tensor-product nodes.
bool advance(std::vector<int>& idx, int order) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (++idx[k] < order) return true;
    idx[k] = 0;
  }
  return false;
}

struct BlockResult {
  double value = 0.0;
  std::size_t clamped = 0;
};

BlockResult block_moment(const ScalarField& f, const Rect& box, const Interval& I, Orientation orient,
                         const GaussLegendre& rule, const MomentOptions& opt, const MultiIndex& alpha) {
  const std::size_t n = box.dim();
  const int q = static_cast<int>(rule.nodes.size());
  std::vector<double> half(n), mid(n), x(n);
  double jac = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    half[k] = 0.5 * box.width(k);
    mid[k] = 0.5 * (box.lo(k) + box.hi(k));
    jac *= half[k];
  }
  std::vector<int> idx(n, 0);
  BlockResult r;
  double sum = 0.0;
  do {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = mid[k] + half[k] * rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    SectionValue s;
    try {
      s = section_value(f, x, I, orient, opt.bisect_tol, opt.clamp);
    } catch (const NoSignChange&) {
      throw NoSignChange(x, "in block " + alpha.to_string() + " at quadrature node (" + join(x, ",") + ")");
    }
    if (s.clamped) ++r.clamped;
    sum += w * s.y;
  } while (advance(idx, q));
  r.value = jac * sum;
  return r;
}

}  // namespace

double theta_volume(const ScalarField& f, const Rect& block, const Interval& I, int nodes_per_axis) {
  const std::size_t n = block.dim();
  const int m = nodes_per_axis < 1 ? 1 : nodes_per_axis;
  std::vector<double> h(n);
  double cell = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = block.width(k) / m;
    cell *= h[k];
  }
  const double hy = I.width() / m;
  cell *= hy;
  std::vector<double> p(n + 1);
  std::vector<int> idx(n, 0);
  std::size_t count = 0;
  do {
    for (std::size_t k = 0; k < n; ++k) p[k] = block.lo(k) + (idx[k] + 0.5) * h[k];
    for (int j = 0; j < m; ++j) {
      p[n] = I.lo + (j + 0.5) * hy;
      if (sign_y(f(p)) > 0) ++count;
    }
  } while (advance(idx, m));
  return static_cast<double>(count) * cell;
}

Tensor theta_volumes(const ScalarField& f, const Grid& grid, const Interval& I, int nodes_per_axis,
                     unsigned threads) {
  Tensor v(shape_of(grid));
  parallel_for(grid.block_count(), threads,
               [&](std::size_t i) { v[i] = theta_volume(f, grid.block(grid.unlinear(i)), I, nodes_per_axis); });
  return v;
}

MomentTensor moment(const ScalarField& f, const Grid& grid, const Interval& I, Orientation orient,
                    const MomentOptions& options) {
  const GaussLegendre& rule = gauss_legendre(options.quad_order);
  const std::size_t blocks = grid.block_count();
  std::vector<BlockResult> results(blocks);
  parallel_for(blocks, options.threads, [&](std::size_t i) {
    const MultiIndex alpha = grid.unlinear(i);
    results[i] = block_moment(f, grid.block(alpha), I, orient, rule, options, alpha);
  });
  MomentTensor m{Tensor(shape_of(grid)), grid, orient, I, 0};
  for (std::size_t i = 0; i < blocks; ++i) {
    m.values[i] = results[i].value;
    m.clamped_nodes += results[i].clamped;
  }
  return m;
}

MomentTensor assemble_from_volume(const Tensor& v, const Grid& grid, const Interval& I, Orientation orient) {
  if (v.shape() != shape_of(grid)) throw ShapeError("volume tensor does not match the grid");
  const double n = sign_of(orient);
  MomentTensor m{Tensor(v.shape()), grid, orient, I, 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double area = grid.block(grid.unlinear(i)).measure();
    m.values[i] = 0.5 * (1 + n) * area * I.hi + 0.5 * (1 - n) * area * I.lo - n * v[i];
  }
  return m;
}

void write_csv(std::ostream& os, const MomentTensor& m) {
  const std::size_t n = m.grid.dim();
  for (std::size_t k = 0; k < n; ++k) os << "a" << (k + 1) << ",";
  os << "value\n";
  std::size_t i = 0;
  for (const MultiIndex& alpha : m.grid.indices()) {
    for (std::size_t k = 0; k < n; ++k) os << alpha[k] << ",";
    os << format_double(m.values[i++]) << "\n";
  }
}

}  // namespace ifit
