#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ifit/geometry.hpp"
#include "ifit/tensor.hpp"

namespace ifit {

class SingularMatrix : public Error {
public:
  using Error::Error;
};

// LU factorization with partial pivoting, PA = LU. Factor once, solve many.
template <class T>
class LU {
public:
  explicit LU(Matrix<T> a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw ShapeError("LU needs a square matrix");
    using std::abs;
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      T best = abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        T v = abs(lu_(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == T(0)) throw SingularMatrix("matrix is singular at column " + std::to_string(k));
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
        sign_ = -sign_;
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        lu_(i, k) /= lu_(k, k);
        const T l = lu_(i, k);
        if (l == T(0)) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }

  // Solves A x = b for a strided right-hand side, in place.
  void solve_inplace(T* b, std::size_t stride) const {
    const std::size_t n = size();
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      T s = b[perm_[i] * stride];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
      y[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      T s = y[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * y[j];
      y[i] = s / lu_(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) b[i * stride] = y[i];
  }

  std::vector<T> solve(std::span<const T> b) const {
    if (b.size() != size()) throw ShapeError("right-hand side has wrong length");
    std::vector<T> x(b.begin(), b.end());
    solve_inplace(x.data(), 1);
    return x;
  }

  T determinant() const {
    T d = T(sign_);
    for (std::size_t i = 0; i < size(); ++i) d *= lu_(i, i);
    return d;
  }

  // Exact 1-norm condition number ||A||_1 ||A^-1||_1, using the original
  // matrix for the first factor.
  T condition(const Matrix<T>& original) const {
    using std::abs;
    const std::size_t n = size();
    T norm_a = T(0), norm_inv = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      T col = T(0);
      for (std::size_t i = 0; i < n; ++i) col += abs(original(i, j));
      if (col > norm_a) norm_a = col;
      std::vector<T> e(n, T(0));
      e[j] = T(1);
      solve_inplace(e.data(), 1);
      T inv = T(0);
      for (const T& v : e) inv += abs(v);
      if (inv > norm_inv) norm_inv = inv;
    }
    return norm_a * norm_inv;
  }

private:
  Matrix<T> lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

// Mode-k solve: replaces every mode-`axis` fiber c of C by A^{-1} c, i.e.
// A^{-1} ._{2->k} C without forming the inverse.
template <class T>
void solve_mode(const LU<T>& lu, std::size_t axis, BasicTensor<T>& C) {
  if (C.extent(axis) != lu.size()) throw ShapeError("mode solve dimension mismatch");
  const std::size_t inner = C.stride(axis);
  const std::size_t mk = C.extent(axis);
  const std::size_t outer = C.size() / (mk * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < inner; ++s) lu.solve_inplace(C.data().data() + o * mk * inner + s, inner);
}

// Axis data of a difference-Vandermonde matrix.
struct ModeAxis {
  double xi = 0.0;     // left end of the axis
  double delta = 1.0;  // block width
  double center = 0.0; // expansion point a_k
  int N = 1;
};

struct ModeMatrix {
  Matrix<double> entries;
  std::size_t axis = 0;
  ModeAxis data;
};

// Entry (alpha, j), 1-based, is (xi + alpha delta - a)^j - (xi + (alpha-1) delta - a)^j.
template <class T>
Matrix<T> vandermonde_matrix(const T& xi, const T& delta, const T& a, int N) {
  Matrix<T> V(N, N);
  for (int alpha = 1; alpha <= N; ++alpha) {
    const T right = xi + T(alpha) * delta - a;
    const T left = xi + T(alpha - 1) * delta - a;
    T pr = right, pl = left;
    for (int j = 1; j <= N; ++j) {
      V(alpha - 1, j - 1) = pr - pl;
      pr *= right;
      pl *= left;
    }
  }
  return V;
}

ModeMatrix vandermonde(double xi, double delta, double a, int N, std::size_t axis = 0);
ModeMatrix vandermonde(const Grid& grid, std::span<const double> center, std::size_t axis);

struct Determinant {
  double value = 0.0;      // +inf when out of range
  double log_value = 0.0;  // natural log, always finite
  bool overflow = false;
};

// det V_N = delta^{N(N+1)/2} prod_{0<=i<j<=N} (j - i), independent of xi and a.
Determinant vandermonde_det(int N, double delta);

// Polynomial sum_beta c_beta (x - a)^beta, exponents 0 <= beta < N.
struct CoeffTensor {
  Tensor coeffs;
  std::vector<double> center;
  Rect domain;

  std::size_t dim() const { return center.size(); }
  double evaluate(std::span<const double> x) const;
  // Coefficient for a 0-based exponent.
  double at(const MultiIndex& beta) const;
};

double evaluate(const CoeffTensor& c, std::span<const double> x);

// Closed-form integral of the polynomial over a box.
double integrate(const CoeffTensor& c, const Rect& box);

// W_beta = prod (beta_k + 1).
Tensor weight_tensor(const std::vector<std::size_t>& shape);

// Per-axis affine change t = scale x + shift of the variable in which the
// solve is carried out; coefficients are re-expanded about `center` in x.
struct Reexpansion {
  std::vector<double> scale;
  std::vector<double> shift;
  std::vector<double> center;
};

struct RecoveryOptions {
  int extended_threshold = 20;  // any N_k at or above this solves in 128-bit floats
  double cond_warn = 1e12;
  std::optional<Reexpansion> reexpand;
};

struct Recovery {
  CoeffTensor coeffs;
  double condition_estimate = 1.0;  // product of per-mode 1-norm condition numbers
  bool ill_conditioned = false;
  bool extended = false;
};

// c = W o [V_n^{-1} ._{2->n} ... V_1^{-1} ._{2->1} d]. Mode matrices are
// rebuilt from their axis data in the working precision.
Recovery recover_coefficients(const Tensor& d, std::span<const ModeMatrix> modes, const Rect& domain,
                              const RecoveryOptions& options = {});

// One row per beta in lexicographic order: b1,..,bn,coefficient.
void write_csv(std::ostream& os, const CoeffTensor& c);

}  // namespace ifit
