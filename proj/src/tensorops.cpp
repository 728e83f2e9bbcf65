#include "ifit/tensorops.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cfloat>
#include <limits>

#include "ifit/format.hpp"

namespace ifit {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

double to_double(double v) { return v; }
double to_double(const Quad& v) { return v.convert_to<double>(); }

// Horner over axis `axis` starting at `offset`, innermost axis contiguous.
double horner(const CoeffTensor& c, std::span<const double> x, std::size_t axis, std::size_t offset) {
  const Tensor& t = c.coeffs;
  const std::size_t n = t.extent(axis);
  const std::size_t step = t.stride(axis);
  const double u = x[axis] - c.center[axis];
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t off = offset + i * step;
    const double term = axis + 1 == t.order() ? t[off] : horner(c, x, axis + 1, off);
    acc = acc * u + term;
  }
  return acc;
}

double weighted_sum(const Tensor& t, const std::vector<std::vector<double>>& w, std::size_t axis,
                    std::size_t offset) {
  const std::size_t n = t.extent(axis);
  const std::size_t step = t.stride(axis);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = offset + i * step;
    const double term = axis + 1 == t.order() ? t[off] : weighted_sum(t, w, axis + 1, off);
    acc += w[axis][i] * term;
  }
  return acc;
}

// T(j, b) = binom(b, j) s^j tau^{b-j}: re-expansion of sum_b c_b t^b with
// t = s (x - a) + tau into powers of (x - a).
template <class T>
Matrix<T> reexpansion_matrix(std::size_t N, const T& s, const T& tau) {
  Matrix<T> binom(N, N);
  for (std::size_t b = 0; b < N; ++b) {
    binom(b, 0) = T(1);
    for (std::size_t j = 1; j <= b; ++j) binom(b, j) = binom(b - 1, j - 1) + (j < b ? binom(b - 1, j) : T(0));
  }
  std::vector<T> spow(N, T(1)), tpow(N, T(1));
  for (std::size_t k = 1; k < N; ++k) {
    spow[k] = spow[k - 1] * s;
    tpow[k] = tpow[k - 1] * tau;
  }
  Matrix<T> out(N, N);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t b = j; b < N; ++b) out(j, b) = binom(b, j) * spow[j] * tpow[b - j];
  return out;
}

template <class T>
Recovery recover_impl(const Tensor& d, std::span<const ModeMatrix> modes, const Rect& domain,
                      const RecoveryOptions& options) {
  BasicTensor<T> work = d.template cast<T>();
  Recovery rec;
  rec.condition_estimate = 1.0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const ModeAxis& ax = modes[k].data;
    Matrix<T> V = vandermonde_matrix<T>(T(ax.xi), T(ax.delta), T(ax.center), ax.N);
    LU<T> lu(V);
    rec.condition_estimate *= to_double(lu.condition(V));
    solve_mode(lu, modes[k].axis, work);
  }
  const Tensor w = weight_tensor(d.shape());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= T(w[i]);

  std::vector<double> center(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) center[k] = modes[k].data.center;
  if (options.reexpand) {
    const Reexpansion& r = *options.reexpand;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const T s = T(r.scale[k]);
      const T tau = s * T(r.center[k]) + T(r.shift[k]) - T(modes[k].data.center);
      work = contract(reexpansion_matrix<T>(work.extent(k), s, tau), Slot::Second, k, work);
    }
    center = r.center;
  }

  std::vector<double> out(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) out[i] = to_double(work[i]);
  rec.coeffs = CoeffTensor{Tensor(d.shape(), std::move(out)), std::move(center), domain};
  rec.ill_conditioned = !(rec.condition_estimate <= options.cond_warn);
  return rec;
}

}  // namespace

ModeMatrix vandermonde(double xi, double delta, double a, int N, std::size_t axis) {
  if (N < 1) throw ShapeError("mode matrix size must be at least 1");
  if (!(delta > 0.0)) throw ShapeError("mode matrix block width must be positive");
  return ModeMatrix{vandermonde_matrix<double>(xi, delta, a, N), axis, ModeAxis{xi, delta, a, N}};
}

ModeMatrix vandermonde(const Grid& grid, std::span<const double> center, std::size_t axis) {
  return vandermonde(grid.base().lo(axis), grid.delta(axis), center[axis], grid.counts()[axis], axis);
}

Determinant vandermonde_det(int N, double delta) {
  if (N < 1) throw ShapeError("mode matrix size must be at least 1");
  if (!(delta > 0.0)) throw ShapeError("mode matrix block width must be positive");
  // prod_{0<=i<j<=N} (j - i) = prod_{j=1}^{N} j!
  long double log_v = 0.5L * N * (N + 1) * std::log(static_cast<long double>(delta));
  long double log_fact = 0.0L;
  for (int j = 1; j <= N; ++j) {
    log_fact += std::log(static_cast<long double>(j));
    log_v += log_fact;
  }
  Determinant det;
  det.log_value = static_cast<double>(log_v);
  const long double lmax = std::log(static_cast<long double>(DBL_MAX));
  const long double lmin = std::log(static_cast<long double>(DBL_MIN));
  if (log_v > lmax || log_v < lmin) {
    det.overflow = true;
    det.value = log_v > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return det;
  }
  long double v = 1.0L, fact = 1.0L;
  for (int j = 1; j <= N; ++j) {
    fact *= j;
    v *= fact;
  }
  v *= std::pow(static_cast<long double>(delta), 0.5L * N * (N + 1));
  det.value = static_cast<double>(v);
  return det;
}

double CoeffTensor::evaluate(std::span<const double> x) const {
  if (x.size() != dim()) throw ShapeError("evaluation point has wrong dimension");
  return horner(*this, x, 0, 0);
}

double CoeffTensor::at(const MultiIndex& beta) const {
  if (beta.size() != dim()) throw ShapeError("exponent has wrong length");
  std::vector<std::size_t> idx(beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    if (static_cast<std::size_t>(beta[k]) >= coeffs.extent(k)) return 0.0;
    idx[k] = static_cast<std::size_t>(beta[k]);
  }
  return coeffs.at(idx);
}

double evaluate(const CoeffTensor& c, std::span<const double> x) { return c.evaluate(x); }

double integrate(const CoeffTensor& c, const Rect& box) {
  if (box.dim() != c.dim()) throw ShapeError("integration box has wrong dimension");
  std::vector<std::vector<double>> w(c.dim());
  for (std::size_t k = 0; k < c.dim(); ++k) {
    const double hi = box.hi(k) - c.center[k];
    const double lo = box.lo(k) - c.center[k];
    double ph = hi, pl = lo;
    for (std::size_t b = 0; b < c.coeffs.extent(k); ++b) {
      w[k].push_back((ph - pl) / static_cast<double>(b + 1));
      ph *= hi;
      pl *= lo;
    }
  }
  return weighted_sum(c.coeffs, w, 0, 0);
}

Tensor weight_tensor(const std::vector<std::size_t>& shape) {
  Tensor w(shape, 1.0);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const std::size_t inner = w.stride(k);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= static_cast<double>((i / inner) % shape[k] + 1);
  }
  return w;
}

Recovery recover_coefficients(const Tensor& d, std::span<const ModeMatrix> modes, const Rect& domain,
                              const RecoveryOptions& options) {
  if (modes.size() != d.order()) throw ShapeError("need one mode matrix per tensor mode");
  bool extended = false;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].axis != k) throw ShapeError("mode matrices must be listed in axis order");
    if (static_cast<std::size_t>(modes[k].data.N) != d.extent(k))
      throw ShapeError("mode matrix " + std::to_string(k + 1) + " does not match the moment tensor");
    if (modes[k].data.N >= options.extended_threshold) extended = true;
  }
  if (options.reexpand && (options.reexpand->scale.size() != d.order() ||
                           options.reexpand->shift.size() != d.order() ||
                           options.reexpand->center.size() != d.order()))
    throw ShapeError("re-expansion data has wrong dimension");
  Recovery rec = extended ? recover_impl<Quad>(d, modes, domain, options)
                          : recover_impl<double>(d, modes, domain, options);
  rec.extended = extended;
  return rec;
}

void write_csv(std::ostream& os, const CoeffTensor& c) {
  const std::size_t n = c.dim();
  for (std::size_t k = 0; k < n; ++k) os << "b" << (k + 1) << ",";
  os << "coefficient\n";
  const auto& shape = c.coeffs.shape();
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
    std::size_t rem = i;
    for (std::size_t k = n; k-- > 0;) {
      idx[k] = rem % shape[k];
      rem /= shape[k];
    }
    for (std::size_t k = 0; k < n; ++k) os << idx[k] << ",";
    os << format_double(c.coeffs[i]) << "\n";
  }
}

}  // namespace ifit
