#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ifit/error.hpp"
#include "ifit/field.hpp"
#include "ifit/geometry.hpp"

namespace ifit {

// Direction in which sign_y f jumps as y increases along a section.
enum class Orientation : int { Increasing = 1, Decreasing = -1 };

inline int sign_of(Orientation o) { return static_cast<int>(o); }
Orientation flipped(Orientation o);
const char* to_string(Orientation o);

class NoSignChange : public Error {
public:
  NoSignChange(std::vector<double> x, const std::string& context = {});
  const std::vector<double>& x() const { return x_; }

private:
  std::vector<double> x_;
};

class InconsistentOrientation : public Error {
public:
  using Error::Error;
};

class ToleranceNotReached : public Error {
public:
  using Error::Error;
};

struct JumpViolation {
  std::vector<double> x;
  int sign_changes = 0;
};

struct JumpReport {
  std::size_t samples_checked = 0;
  std::vector<JumpViolation> violations;

  bool clean() const { return violations.empty(); }
};

// sign_y convention: ties f = 0 count as +1.
inline int sign_y(double value) { return value >= 0.0 ? 1 : -1; }

// Deterministic quasi-random points inside R: a Halton sequence shifted by
// a seed-dependent rotation (Cranley-Patterson).
std::vector<std::vector<double>> sample_sections(const Rect& R, std::size_t count, std::uint64_t seed = 0);

// Sign pattern of f at the ends of I on sampled sections. With skip_flat,
// sections without a sign change are ignored instead of rejected.
Orientation orientation(const ScalarField& f, const Rect& R, const Interval& I, std::size_t samples,
                        std::uint64_t seed = 0, bool skip_flat = false);

// Bisection for the sign change of y -> f(x, y) on I. The result is within
// tol/2 of the jump, or as close as doubles allow.
double locate_jump(const ScalarField& f, std::span<const double> x, const Interval& I, double tol,
                   int max_iterations = 200);

// Outcome of locate_jump with a fallback for sections without a jump: the
// integral representation then selects the endpoint of I.
struct SectionValue {
  double y = 0.0;
  bool clamped = false;
};
SectionValue section_value(const ScalarField& f, std::span<const double> x, const Interval& I,
                           Orientation orient, double tol, bool clamp);

JumpReport verify_single_jump(const ScalarField& f, const Rect& R, const Interval& I,
                              std::size_t x_samples = 64, std::size_t y_scan = 512,
                              std::uint64_t seed = 0, unsigned threads = 1);

// Number of sign changes of y -> sign_y f(x, y) over `scan` equispaced y.
int count_sign_changes(const ScalarField& f, std::span<const double> x, const Interval& I,
                       std::size_t scan);

}  // namespace ifit
