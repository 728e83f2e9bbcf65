// Reference values computed without the library's own numerics.
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "ifit/field.hpp"
#include "ifit/geometry.hpp"
#include "ifit/tensor.hpp"

namespace oracle {

// Quartic surface with two polynomial branches over the plane.
inline constexpr const char* kQuartic =
    "0.5*x^4 + 0.5*x^3*y + 0.5*x^3 + 2*x^2*y + 0.5*x^2*z + 0.5*x*y^2 - 0.5*x*y*z + 1.5*x*y - 0.5*x*z + x + "
    "1.5*y^2 - 0.5*y*z + 2*y - z^2 + 3*z - 2";

// Dense polynomial sum c[beta] prod (x_k - a_k)^beta_k, row-major exponents.
struct Poly {
  std::vector<std::size_t> shape;
  std::vector<double> c;
  std::vector<double> a;

  double operator()(std::span<const double> x) const {
    long double s = 0;
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::size_t rem = i;
      for (std::size_t k = shape.size(); k-- > 0;) {
        idx[k] = rem % shape[k];
        rem /= shape[k];
      }
      long double term = c[i];
      for (std::size_t k = 0; k < shape.size(); ++k) term *= std::pow(static_cast<long double>(x[k] - a[k]), idx[k]);
      s += term;
    }
    return static_cast<double>(s);
  }

  // Antiderivative per monomial, long double.
  double integral(const ifit::Rect& box) const {
    long double s = 0;
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::size_t rem = i;
      for (std::size_t k = shape.size(); k-- > 0;) {
        idx[k] = rem % shape[k];
        rem /= shape[k];
      }
      long double term = c[i];
      for (std::size_t k = 0; k < shape.size(); ++k) {
        const long double p = static_cast<long double>(idx[k] + 1);
        term *= (std::pow(static_cast<long double>(box.hi(k) - a[k]), p) -
                 std::pow(static_cast<long double>(box.lo(k) - a[k]), p)) / p;
      }
      s += term;
    }
    return static_cast<double>(s);
  }

  double coeff(std::initializer_list<std::size_t> beta) const {
    std::size_t off = 0, k = 0;
    for (std::size_t b : beta) off = off * shape[k++] + b;
    return c[off];
  }
};

inline Poly random_poly(std::vector<std::size_t> shape, std::vector<double> center, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p{shape, {}, std::move(center)};
  p.c.resize(ifit::Tensor::count(shape));
  for (double& v : p.c) v = u(rng);
  return p;
}

// Exact block moments of a polynomial.
inline ifit::Tensor exact_moments(const Poly& g, const ifit::Grid& grid) {
  std::vector<std::size_t> shape;
  for (std::size_t k = 0; k < grid.dim(); ++k) shape.push_back(static_cast<std::size_t>(grid.counts()[k]));
  ifit::Tensor d(shape);
  std::size_t i = 0;
  for (const auto& alpha : grid.indices()) d[i++] = g.integral(grid.block(alpha));
  return d;
}

// f(x, y) = y - g(x): increasing orientation, jump exactly at g.
inline ifit::ScalarField graph_of(Poly g) {
  return [g = std::move(g)](std::span<const double> p) { return p.back() - g(p.first(p.size() - 1)); };
}

inline double binom_half(int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b *= (0.5 - i) / (i + 1);
  return b;
}

inline double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// Taylor coefficient of x^{2i} y^{2j} in sqrt(1 - x^2 - y^2).
inline double sphere_taylor(int i, int j) {
  const int k = i + j;
  return binom_half(k) * ((k % 2) ? -1.0 : 1.0) * factorial(k) / (factorial(i) * factorial(j));
}

// Taylor partial sum with per-axis exponent < 6.
inline double sphere_partial(double x, double y) {
  double s = 0.0;
  for (int i = 0; 2 * i < 6; ++i)
    for (int j = 0; 2 * j < 6; ++j) s += sphere_taylor(i, j) * std::pow(x, 2 * i) * std::pow(y, 2 * j);
  return s;
}

// Composite Gauss-free reference: Simpson in both axes on a fine grid.
inline double simpson2(double (*fn)(double, double), double x0, double x1, double y0, double y1, int n) {
  if (n % 2) ++n;
  const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
  auto w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  long double s = 0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) s += w(i) * w(j) * fn(x0 + i * hx, y0 + j * hy);
  return static_cast<double>(s * hx * hy / 9.0);
}

}  // namespace oracle
