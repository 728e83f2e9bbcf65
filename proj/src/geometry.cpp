#include "ifit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ifit/format.hpp"

namespace ifit {

MultiIndex::MultiIndex(std::vector<int> components) : c_(std::move(components)) {
  for (int v : c_)
    if (v < 0) throw GeometryError("multi-index components must be nonnegative");
}

MultiIndex::MultiIndex(std::initializer_list<int> components)
    : MultiIndex(std::vector<int>(components)) {}

MultiIndex MultiIndex::filled(std::size_t n, int value) {
  return MultiIndex(std::vector<int>(n, value));
}

std::size_t MultiIndex::product() const {
  std::size_t p = 1;
  for (int v : c_) p *= static_cast<std::size_t>(v);
  return p;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(c_[k]);
  }
  return s + ")";
}

bool componentwise_le(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw GeometryError("multi-index length mismatch");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > b[k]) return false;
  return true;
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw GeometryError("interval needs finite lo < hi, got [" + format_double(lo) + ", " +
                        format_double(hi) + "]");
}

Rect::Rect(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw GeometryError("rectangle corner dimensions differ");
  if (lo_.empty()) throw GeometryError("rectangle must have at least one axis");
  for (std::size_t k = 0; k < lo_.size(); ++k)
    if (!(lo_[k] < hi_[k]) || !std::isfinite(lo_[k]) || !std::isfinite(hi_[k]))
      throw GeometryError("rectangle axis " + std::to_string(k + 1) + " needs finite lo < hi");
}

Rect::Rect(std::span<const Interval> sides) {
  if (sides.empty()) throw GeometryError("rectangle must have at least one axis");
  for (const auto& s : sides) {
    lo_.push_back(s.lo);
    hi_.push_back(s.hi);
  }
}

double Rect::measure() const {
  double m = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) m *= width(k);
  return m;
}

std::vector<double> Rect::center() const {
  std::vector<double> c(dim());
  for (std::size_t k = 0; k < dim(); ++k) c[k] = 0.5 * (lo_[k] + hi_[k]);
  return c;
}

bool Rect::contains(std::span<const double> x, double slack) const {
  if (x.size() != dim()) return false;
  for (std::size_t k = 0; k < dim(); ++k)
    if (x[k] < lo_[k] - slack || x[k] > hi_[k] + slack) return false;
  return true;
}

Rect Rect::extended(const Interval& axis) const {
  auto lo = lo_;
  auto hi = hi_;
  lo.push_back(axis.lo);
  hi.push_back(axis.hi);
  return Rect(std::move(lo), std::move(hi));
}

Grid::Grid(Rect base, MultiIndex counts) : base_(std::move(base)), counts_(std::move(counts)) {
  if (counts_.size() != base_.dim()) throw GeometryError("grid counts do not match rectangle dimension");
  deltas_.resize(base_.dim());
  for (std::size_t k = 0; k < base_.dim(); ++k) {
    if (counts_[k] < 1) throw GeometryError("grid counts must be at least 1");
    deltas_[k] = base_.width(k) / counts_[k];
  }
}

double Grid::block_measure() const {
  double m = 1.0;
  for (double d : deltas_) m *= d;
  return m;
}

Rect Grid::block(const MultiIndex& alpha) const {
  if (alpha.size() != dim()) throw GeometryError("block index has wrong length");
  std::vector<double> lo(dim()), hi(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    if (alpha[k] < 1 || alpha[k] > counts_[k])
      throw GeometryError("block index " + alpha.to_string() + " out of range " + counts_.to_string());
    lo[k] = base_.lo(k) + (alpha[k] - 1) * deltas_[k];
    // The last block ends exactly on the base corner.
    hi[k] = alpha[k] == counts_[k] ? base_.hi(k) : base_.lo(k) + alpha[k] * deltas_[k];
  }
  return Rect(std::move(lo), std::move(hi));
}

MultiIndexRange Grid::indices() const { return MultiIndexRange(counts_); }

std::size_t Grid::linear(const MultiIndex& alpha) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (alpha[k] < 1 || alpha[k] > counts_[k]) throw GeometryError("block index out of range");
    off = off * counts_[k] + (alpha[k] - 1);
  }
  return off;
}

MultiIndex Grid::unlinear(std::size_t offset) const {
  std::vector<int> a(dim());
  for (std::size_t k = dim(); k-- > 0;) {
    a[k] = static_cast<int>(offset % counts_[k]) + 1;
    offset /= counts_[k];
  }
  return MultiIndex(std::move(a));
}

Rect block(const Grid& grid, const MultiIndex& alpha) { return grid.block(alpha); }

MultiIndexRange::MultiIndexRange(MultiIndex counts) : counts_(std::move(counts)) {}

MultiIndexRange::iterator MultiIndexRange::begin() const {
  if (counts_.size() == 0 || counts_.product() == 0) return end();
  return iterator(&counts_, MultiIndex::filled(counts_.size(), 1), false);
}

MultiIndexRange::iterator& MultiIndexRange::iterator::operator++() {
  for (std::size_t k = cur_.size(); k-- > 0;) {
    if (cur_[k] < (*counts_)[k]) {
      ++cur_[k];
      return *this;
    }
    cur_[k] = 1;
  }
  done_ = true;
  return *this;
}

MultiIndexRange iterate(const Grid& grid) { return grid.indices(); }

std::vector<double> AffineMap::apply(std::span<const double> x) const {
  std::vector<double> t(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) t[k] = scale[k] * x[k] + shift[k];
  return t;
}

std::vector<double> AffineMap::invert(std::span<const double> t) const {
  std::vector<double> x(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) x[k] = (t[k] - shift[k]) / scale[k];
  return x;
}

double AffineMap::jacobian() const {
  double j = 1.0;
  for (double s : scale) j *= std::fabs(s);
  return j;
}

AffineMap normalize(const Rect& rect) {
  AffineMap m;
  m.scale.resize(rect.dim());
  m.shift.resize(rect.dim());
  for (std::size_t k = 0; k < rect.dim(); ++k) {
    const double w = rect.width(k);
    m.scale[k] = 2.0 / w;
    m.shift[k] = -(rect.hi(k) + rect.lo(k)) / w;
  }
  return m;
}

}  // namespace ifit
