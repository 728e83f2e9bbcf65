#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ifit/tensorops.hpp"
#include "oracles.hpp"

using namespace ifit;

namespace {

Matrix<double> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix<double> m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

std::vector<ModeMatrix> modes_for(const Grid& g, std::span<const double> center) {
  std::vector<ModeMatrix> m;
  for (std::size_t k = 0; k < g.dim(); ++k) m.push_back(vandermonde(g, center, k));
  return m;
}

Recovery round_trip(const oracle::Poly& p, const Grid& g, RecoveryOptions opt = {}) {
  const auto modes = modes_for(g, p.a);
  return recover_coefficients(oracle::exact_moments(p, g), modes, g.base(), opt);
}

}  // namespace

TEST_CASE("vandermonde examples") {
  const ModeMatrix one = vandermonde(0.0, 0.5, 0.0, 1);
  CHECK(one.entries.rows() == 1);
  CHECK(one.entries(0, 0) == 0.5);

  const ModeMatrix two = vandermonde(-1.0, 1.0, 0.0, 2);
  CHECK(two.entries(0, 0) == 1.0);
  CHECK(two.entries(0, 1) == -1.0);
  CHECK(two.entries(1, 0) == 1.0);
  CHECK(two.entries(1, 1) == 1.0);

  const double d = 1.0 / 3;
  const ModeMatrix three = vandermonde(-0.5, d, 0.0, 3);
  for (int a = 1; a <= 3; ++a) {
    const double r = -0.5 + a * d, l = -0.5 + (a - 1) * d;
    CHECK(three.entries(a - 1, 0) == doctest::Approx(d).epsilon(1e-15));
    CHECK(three.entries(a - 1, 1) == doctest::Approx(r * r - l * l).epsilon(1e-14));
    CHECK(three.entries(a - 1, 2) == doctest::Approx(r * r * r - l * l * l).epsilon(1e-14));
  }
}

TEST_CASE("vandermonde_det examples") {
  CHECK(vandermonde_det(1, 0.5).value == 0.5);
  CHECK(vandermonde_det(2, 1.0).value == 2.0);
  CHECK(LU<double>(vandermonde(-1.0, 1.0, 0.0, 2).entries).determinant() == doctest::Approx(2.0));
  const double delta = 0.37;
  CHECK(vandermonde_det(3, delta).value == doctest::Approx(12 * std::pow(delta, 6)).epsilon(1e-14));
  CHECK(LU<double>(vandermonde(0.2, delta, 1.3, 3).entries).determinant() ==
        doctest::Approx(12 * std::pow(delta, 6)).epsilon(1e-12));
}

TEST_CASE("vandermonde_det reports overflow with a finite log") {
  const Determinant d = vandermonde_det(200, 10.0);
  CHECK(d.overflow);
  CHECK(std::isfinite(d.log_value));
  CHECK(d.log_value > 700);
  const Determinant small = vandermonde_det(6, 0.2);
  CHECK_FALSE(small.overflow);
  CHECK(std::log(small.value) == doctest::Approx(small.log_value).epsilon(1e-13));
}

TEST_CASE("property: determinant closed form matches LU and is center independent") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2, 2), w(1, 2), t(0, 1);
  for (int N = 1; N <= 8; ++N) {
    const double width = w(rng), delta = width / N, xi = u(rng);
    const double closed = vandermonde_det(N, delta).value;
    for (int trial = 0; trial < 10; ++trial) {
      const double lu = LU<double>(vandermonde(xi, delta, xi + width * t(rng), N).entries).determinant();
      CHECK(std::fabs(lu - closed) <= 1e-10 * std::fabs(closed));
    }
  }
}

TEST_CASE("contract examples") {
  std::mt19937_64 rng(3);
  const Tensor C = random_tensor({3, 4, 2}, rng);
  for (std::size_t k = 0; k < 3; ++k)
    for (Slot s : {Slot::First, Slot::Second}) {
      const Tensor out = contract(Matrix<double>::identity(C.extent(k)), s, k, C);
      for (std::size_t i = 0; i < C.size(); ++i) CHECK(out[i] == C[i]);
    }

  const Matrix<double> A = random_matrix(3, 4, rng);
  const Tensor c = random_tensor({4}, rng);
  const Tensor Ac = contract(A, Slot::Second, 0, c);
  REQUIRE(Ac.shape() == std::vector<std::size_t>{3});
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 4; ++j) s += A(i, j) * c[j];
    CHECK(Ac[i] == doctest::Approx(s).epsilon(1e-15));
  }
  CHECK_THROWS_AS(contract(A, Slot::First, 0, c), ShapeError);
  CHECK_THROWS_AS(contract(A, Slot::Second, 1, c), ShapeError);
}

TEST_CASE("property: contractions on distinct modes commute") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor C = random_tensor({3, 3, 3}, rng);
    const Matrix<double> A = random_matrix(3, 3, rng), B = random_matrix(3, 3, rng);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == j) continue;
        const Tensor lhs = contract(A, Slot::First, i, contract(B, Slot::Second, j, C));
        const Tensor rhs = contract(B, Slot::Second, j, contract(A, Slot::First, i, C));
        for (std::size_t e = 0; e < C.size(); ++e) CHECK(std::fabs(lhs[e] - rhs[e]) <= 1e-14);
      }
  }
}

TEST_CASE("property: contraction shapes") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> ext(1, 5), ord(1, 4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::size_t> shape(ord(rng));
    for (auto& s : shape) s = ext(rng);
    const Tensor C = random_tensor(shape, rng);
    const std::size_t k = rng() % shape.size(), free = ext(rng);
    const Tensor a = contract(random_matrix(shape[k], free, rng), Slot::First, k, C);
    const Tensor b = contract(random_matrix(free, shape[k], rng), Slot::Second, k, C);
    auto expect = shape;
    expect[k] = free;
    CHECK(a.shape() == expect);
    CHECK(b.shape() == expect);
  }
}

TEST_CASE("solve_mode inverts a slot-2 contraction") {
  std::mt19937_64 rng(4);
  const Tensor C = random_tensor({4, 3, 5}, rng);
  const Matrix<double> A = random_matrix(3, 3, rng);
  Tensor y = contract(A, Slot::Second, 1, C);
  solve_mode(LU<double>(A), 1, y);
  for (std::size_t i = 0; i < C.size(); ++i) CHECK(std::fabs(y[i] - C[i]) <= 1e-12);
}

TEST_CASE("LU rejects singular matrices") {
  Matrix<double> m(2, 2, 1.0);
  CHECK_THROWS_AS(LU<double>{m}, SingularMatrix);
}

TEST_CASE("weight tensor") {
  const Tensor w = weight_tensor({2, 3});
  CHECK(w.at({0, 0}) == 1.0);
  CHECK(w.at({1, 2}) == 6.0);
  CHECK(w.at({0, 2}) == 3.0);
}

TEST_CASE("constant recovery in one dimension") {
  const Grid g(Rect({0.0}, {2.0}), MultiIndex{5});
  const double c0 = 3.25;
  const Tensor d({5}, c0 * g.delta(0));
  const std::vector<double> a{1.0};
  const auto modes = modes_for(g, a);
  const Recovery r = recover_coefficients(d, modes, g.base());
  CHECK(std::fabs(r.coeffs.coeffs[0] - c0) <= 1e-12);
  for (std::size_t j = 1; j < 5; ++j) CHECK(std::fabs(r.coeffs.coeffs[j]) <= 1e-11);
}

TEST_CASE("property: exact-moment round trip, n <= 3") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> count(1, 6);
  for (std::size_t n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<double> lo(n), hi(n), a(n);
      std::vector<int> N(n);
      std::vector<std::size_t> shape(n);
      for (std::size_t k = 0; k < n; ++k) {
        lo[k] = u(rng);
        hi[k] = lo[k] + 1.0 + std::fabs(u(rng));
        a[k] = lo[k] + (hi[k] - lo[k]) * (0.5 + 0.5 * u(rng));
        N[k] = count(rng);
        shape[k] = static_cast<std::size_t>(N[k]);
      }
      const oracle::Poly p = oracle::random_poly(shape, a, rng());
      const Recovery r = round_trip(p, Grid(Rect(lo, hi), MultiIndex(N)));
      double scale = 0;
      for (double c : p.c) scale = std::max(scale, std::fabs(c));
      for (std::size_t i = 0; i < p.c.size(); ++i)
        CHECK(std::fabs(r.coeffs.coeffs[i] - p.c[i]) <= 1e-9 * scale);
    }
}

TEST_CASE("property: block integrals of the recovered polynomial match the moments") {
  std::mt19937_64 rng(2);
  const Grid g(Rect({-1.0, 0.0}, {0.5, 2.0}), MultiIndex{4, 5});
  const std::vector<double> a{-0.2, 1.1};
  const Tensor d = random_tensor({4, 5}, rng);
  const auto modes = modes_for(g, a);
  const Recovery r = recover_coefficients(d, modes, g.base());
  for (const auto& alpha : g.indices())
    CHECK(std::fabs(integrate(r.coeffs, g.block(alpha)) - d[g.linear(alpha)]) <= 1e-9 * g.block_measure());
}

TEST_CASE("property: enlarging N only appends near-zero coefficients") {
  const oracle::Poly p = oracle::random_poly({3, 2}, {0.3, -0.1}, 99);
  const Rect R({0.0, -0.5}, {1.0, 0.5});
  const Recovery exact = round_trip(p, Grid(R, MultiIndex{3, 2}));
  const Recovery padded = round_trip(p, Grid(R, MultiIndex{6, 5}));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const double v = padded.coeffs.coeffs.at({i, j});
      if (i < 3 && j < 2)
        CHECK(std::fabs(v - exact.coeffs.coeffs.at({i, j})) <= 1e-7);
      else
        CHECK(std::fabs(v) <= 1e-7);
    }
}

TEST_CASE("extended precision path for large N") {
  // Rounding of the double moments bounds the attainable accuracy here.
  const oracle::Poly p = oracle::random_poly({22}, {1.0}, 5);
  const Grid g(Rect({0.0}, {2.0}), MultiIndex{22});
  RecoveryOptions plain;
  plain.extended_threshold = 1000;
  const Recovery wide = round_trip(p, g);
  const Recovery narrow = round_trip(p, g, plain);
  CHECK(wide.extended);
  CHECK_FALSE(narrow.extended);
  double scale = 0, wide_err = 0, narrow_err = 0;
  for (double c : p.c) scale = std::max(scale, std::fabs(c));
  for (std::size_t i = 0; i < p.c.size(); ++i) {
    wide_err = std::max(wide_err, std::fabs(wide.coeffs.coeffs[i] - p.c[i]));
    narrow_err = std::max(narrow_err, std::fabs(narrow.coeffs.coeffs[i] - p.c[i]));
  }
  CHECK(wide_err <= 1e-6 * scale);
  CHECK(narrow_err <= 1e-6 * scale);
}

TEST_CASE("re-expansion about a new center") {
  // Solve in t = 2x - 1 on [-1, 1] and report about x = 0.25.
  const oracle::Poly t_poly = oracle::random_poly({4}, {0.0}, 12);
  const Grid g(Rect({-1.0}, {1.0}), MultiIndex{4});
  RecoveryOptions opt;
  opt.reexpand = Reexpansion{{2.0}, {-1.0}, {0.25}};
  const auto modes = modes_for(g, t_poly.a);
  const Recovery r = recover_coefficients(oracle::exact_moments(t_poly, g), modes, Rect({0.0}, {1.0}), opt);
  CHECK(r.coeffs.center == std::vector<double>{0.25});
  for (double x = 0.0; x <= 1.0; x += 0.125) {
    const double t[] = {2 * x - 1}, xs[] = {x};
    CHECK(std::fabs(r.coeffs.evaluate(xs) - t_poly(t)) <= 1e-12);
  }
}

TEST_CASE("evaluate and integrate") {
  CoeffTensor c{Tensor({1, 1}, 5.0), {0.3, 0.4}, Rect({0, 0}, {1, 1})};
  const double x[] = {0.9, -7.0};
  CHECK(evaluate(c, x) == 5.0);
  CHECK(integrate(c, Rect({0, 0}, {2, 3})) == 30.0);

  CoeffTensor q{Tensor({3}, std::vector<double>{1, 2, 3}), {1.0}, Rect({0.0}, {2.0})};
  const double at[] = {3.0};
  CHECK(q.evaluate(at) == 1 + 2 * 2 + 3 * 4);
  CHECK(integrate(q, Rect({1.0}, {2.0})) == doctest::Approx(1 + 1 + 1));
  CHECK(q.at(MultiIndex{2}) == 3.0);
}

TEST_CASE("coefficient csv layout") {
  CoeffTensor c{Tensor({2, 2}, std::vector<double>{1, 0.1, -2.5, 1e-20}), {0, 0}, Rect({0, 0}, {1, 1})};
  std::ostringstream os;
  write_csv(os, c);
  CHECK(os.str() == "b1,b2,coefficient\n0,0,1\n0,1,0.1\n1,0,-2.5\n1,1,1e-20\n");
}
