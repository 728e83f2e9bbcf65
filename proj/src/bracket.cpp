#include "ifit/bracket.hpp"

#include <random>

#include "ifit/format.hpp"
#include "ifit/parallel.hpp"

namespace ifit {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::string point_text(std::span<const double> x) { return "(" + join(x) + ")"; }

}  // namespace

Orientation flipped(Orientation o) {
  return o == Orientation::Increasing ? Orientation::Decreasing : Orientation::Increasing;
}

const char* to_string(Orientation o) { return o == Orientation::Increasing ? "+1" : "-1"; }

NoSignChange::NoSignChange(std::vector<double> x, const std::string& context)
    : Error("no sign change on the section at x = " + point_text(x) + (context.empty() ? "" : " " + context)),
      x_(std::move(x)) {}

std::vector<std::vector<double>> sample_sections(const Rect& R, std::size_t count, std::uint64_t seed) {
  const std::size_t n = R.dim();
  if (n > std::size(kPrimes)) throw Error("sampling supports at most 16 independent variables");
  std::mt19937_64 rng(seed);
  std::vector<double> shift(n);
  for (auto& s : shift) s = seed == 0 ? 0.0 : static_cast<double>(rng() >> 11) * 0x1.0p-53;
  std::vector<std::vector<double>> pts(count, std::vector<double>(n));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double u = radical_inverse(i + 1, kPrimes[k]) + shift[k];
      if (u >= 1.0) u -= 1.0;
      pts[i][k] = R.lo(k) + u * R.width(k);
    }
  }
  return pts;
}

namespace {

struct SectionEval {
  const ScalarField& f;
  std::vector<double> buf;

  SectionEval(const ScalarField& field, std::span<const double> x) : f(field), buf(x.begin(), x.end()) {
    buf.push_back(0.0);
  }
  double operator()(double y) {
    buf.back() = y;
    return f(buf);
  }
};

}  // namespace

Orientation orientation(const ScalarField& f, const Rect& R, const Interval& I, std::size_t samples,
                        std::uint64_t seed, bool skip_flat) {
  if (samples == 0) samples = 1;
  const auto pts = sample_sections(R, samples, seed);
  bool have = false;
  Orientation result = Orientation::Increasing;
  for (const auto& x : pts) {
    SectionEval at(f, x);
    const double flo = at(I.lo), fhi = at(I.hi);
    const int lo = sign_y(flo);
    const int hi = sign_y(fhi);
    if (lo == hi) {
      // Flat sections and jumps sitting on the boundary say nothing about the direction.
      if (skip_flat || flo == 0.0 || fhi == 0.0) continue;
      throw NoSignChange(x, "while determining orientation");
    }
    const Orientation o = hi > lo ? Orientation::Increasing : Orientation::Decreasing;
    if (have && o != result)
      throw InconsistentOrientation("orientation differs between sections; first " +
                                    std::string(to_string(result)) + ", then " + to_string(o) +
                                    " at x = " + point_text(x));
    result = o;
    have = true;
  }
  if (!have) throw NoSignChange(pts.front(), "on every sampled section");
  return result;
}

double locate_jump(const ScalarField& f, std::span<const double> x, const Interval& I, double tol,
                   int max_iterations) {
  SectionEval at(f, x);
  double lo = I.lo, hi = I.hi;
  const double flo = at(lo), fhi = at(hi);
  const int slo = sign_y(flo);
  const int shi = sign_y(fhi);
  if (slo == shi) {
    // A zero exactly at an endpoint is a jump on the boundary of I.
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    throw NoSignChange({x.begin(), x.end()});
  }
  int it = 0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // adjacent doubles
    if (++it > max_iterations)
      throw ToleranceNotReached("bisection did not reach tolerance " + format_double(tol) + " within " +
                                std::to_string(max_iterations) + " iterations");
    if (sign_y(at(mid)) == slo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SectionValue section_value(const ScalarField& f, std::span<const double> x, const Interval& I,
                           Orientation orient, double tol, bool clamp) {
  if (!clamp) return {locate_jump(f, x, I, tol), false};
  SectionEval at(f, x);
  const int slo = sign_y(at(I.lo));
  const int shi = sign_y(at(I.hi));
  if (slo != shi) return {locate_jump(f, x, I, tol), false};
  // Constant sign: the integral of the Heaviside indicator over I is |I|
  // (f >= 0) or 0 (f < 0), which pins g to an endpoint.
  const bool nonnegative = slo > 0;
  const bool increasing = orient == Orientation::Increasing;
  return {nonnegative == increasing ? I.lo : I.hi, true};
}

int count_sign_changes(const ScalarField& f, std::span<const double> x, const Interval& I,
                       std::size_t scan) {
  if (scan < 2) scan = 2;
  SectionEval at(f, x);
  int changes = 0;
  const double flo = at(I.lo);
  int prev = sign_y(flo);
  double fhi = flo;
  for (std::size_t j = 1; j < scan; ++j) {
    const double y = j + 1 == scan ? I.hi : I.lo + I.width() * static_cast<double>(j) / (scan - 1);
    fhi = at(y);
    const int s = sign_y(fhi);
    if (s != prev) ++changes;
    prev = s;
  }
  if (changes == 0 && (flo == 0.0 || fhi == 0.0)) return 1;
  return changes;
}

JumpReport verify_single_jump(const ScalarField& f, const Rect& R, const Interval& I, std::size_t x_samples,
                              std::size_t y_scan, std::uint64_t seed, unsigned threads) {
  const auto pts = sample_sections(R, x_samples, seed);
  std::vector<int> counts(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t i) { counts[i] = count_sign_changes(f, pts[i], I, y_scan); });
  JumpReport report;
  report.samples_checked = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (counts[i] != 1) report.violations.push_back({pts[i], counts[i]});
  return report;
}

}  // namespace ifit
