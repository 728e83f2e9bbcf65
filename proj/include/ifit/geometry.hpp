#pragma once

#include <cstddef>
#include <initializer_list>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "ifit/error.hpp"

namespace ifit {

class GeometryError : public Error {
public:
  using Error::Error;
};

// Tuple of nonnegative integers. Used both for 1-based block indices
// (1 <= alpha_k <= N_k) and for 0-based monomial exponents.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> components);
  MultiIndex(std::initializer_list<int> components);

  // n copies of value.
  static MultiIndex filled(std::size_t n, int value);

  std::size_t size() const { return c_.size(); }
  int operator[](std::size_t k) const { return c_[k]; }
  int& operator[](std::size_t k) { return c_[k]; }
  const std::vector<int>& components() const { return c_; }

  // Product of the components.
  std::size_t product() const;

  bool operator==(const MultiIndex&) const = default;
  std::string to_string() const;

private:
  std::vector<int> c_;
};

// Componentwise order: a <= b iff a_k <= b_k for every k.
bool componentwise_le(const MultiIndex& a, const MultiIndex& b);

// Closed interval [lo, hi] with lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  Interval() = default;
  Interval(double lo_, double hi_);

  double width() const { return hi - lo; }
  bool contains(double y) const { return y >= lo && y <= hi; }
  double clamp(double y) const { return y < lo ? lo : (y > hi ? hi : y); }
};

// Axis-aligned box prod_k [lo_k, hi_k].
class Rect {
public:
  Rect() = default;
  Rect(std::vector<double> lo, std::vector<double> hi);
  explicit Rect(std::span<const Interval> sides);

  std::size_t dim() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  double lo(std::size_t k) const { return lo_[k]; }
  double hi(std::size_t k) const { return hi_[k]; }
  double width(std::size_t k) const { return hi_[k] - lo_[k]; }
  Interval side(std::size_t k) const { return {lo_[k], hi_[k]}; }

  double measure() const;
  std::vector<double> center() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;

  // Cartesian product with one more axis appended.
  Rect extended(const Interval& axis) const;

private:
  std::vector<double> lo_, hi_;
};

class MultiIndexRange;

// Uniform tensor partition of a base rectangle into N_1 x ... x N_n blocks.
class Grid {
public:
  Grid() = default;
  Grid(Rect base, MultiIndex counts);

  const Rect& base() const { return base_; }
  const MultiIndex& counts() const { return counts_; }
  const std::vector<double>& deltas() const { return deltas_; }
  double delta(std::size_t k) const { return deltas_[k]; }
  std::size_t dim() const { return base_.dim(); }
  std::size_t block_count() const { return counts_.product(); }
  double block_measure() const;

  // Block R_alpha for a 1-based index, 1 <= alpha <= N.
  Rect block(const MultiIndex& alpha) const;

  // Lexicographic enumeration of the 1-based block indices, last axis fastest.
  MultiIndexRange indices() const;

  // Row-major position of a 1-based block index, consistent with indices().
  std::size_t linear(const MultiIndex& alpha) const;
  MultiIndex unlinear(std::size_t offset) const;

private:
  Rect base_;
  MultiIndex counts_;
  std::vector<double> deltas_;
};

Rect block(const Grid& grid, const MultiIndex& alpha);

// Forward range over the 1-based indices of a grid.
class MultiIndexRange {
public:
  class iterator {
  public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = MultiIndex;
    using difference_type = std::ptrdiff_t;
    using reference = const MultiIndex&;
    using pointer = const MultiIndex*;

    iterator() = default;
    iterator(const MultiIndex* counts, MultiIndex current, bool done)
        : counts_(counts), cur_(std::move(current)), done_(done) {}
    reference operator*() const { return cur_; }
    pointer operator->() const { return &cur_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& o) const { return done_ == o.done_ && (done_ || cur_ == o.cur_); }

  private:
    const MultiIndex* counts_ = nullptr;
    MultiIndex cur_;
    bool done_ = true;
  };

  explicit MultiIndexRange(MultiIndex counts);
  iterator begin() const;
  iterator end() const { return iterator(&counts_, {}, true); }
  std::size_t size() const { return counts_.product(); }

private:
  MultiIndex counts_;
};

MultiIndexRange iterate(const Grid& grid);

// Componentwise affine map t = scale * x + shift.
struct AffineMap {
  std::vector<double> scale;
  std::vector<double> shift;

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> invert(std::span<const double> t) const;
  // |det| of the linear part.
  double jacobian() const;
};

// Map sending rect onto [-1, 1]^n, corners to corners.
AffineMap normalize(const Rect& rect);

}  // namespace ifit
