#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ifit/bracket.hpp"
#include "ifit/expr.hpp"
#include "ifit/field.hpp"
#include "ifit/geometry.hpp"
#include "ifit/moments.hpp"
#include "ifit/tensorops.hpp"

namespace ifit {

struct FitOptions {
  double bisect_tol = 1e-13;
  int quad_order = 12;
  unsigned threads = 1;
  bool clamp = false;           // allow sections without a jump (endpoint of I)
  int extended_threshold = 20;  // N_k at or above this solves in 128-bit floats
  double cond_warn = 1e12;
  int validation_points = 0;    // per axis; 0 picks by dimension
  std::size_t orientation_samples = 64;
  std::uint64_t seed = 0;
  int reference_blocks = 0;     // weak-star grid per axis; 0 picks one coprime with the schedule
};

// f(x, y) = 0 on R x I, expanded about `center`.
struct ImplicitProblem {
  ScalarField f;
  std::string label;
  Rect R;
  Interval I;
  std::vector<double> center;
  Orientation orientation = Orientation::Increasing;
  FitOptions options;
};

// Validates the center and computes the orientation by sampling unless one
// is supplied.
ImplicitProblem make_problem(ScalarField f, Rect R, Interval I, std::vector<double> center,
                             FitOptions options = {}, std::string label = {},
                             std::optional<Orientation> orient = std::nullopt);

struct Timings {
  double moments = 0.0;  // seconds
  double solve = 0.0;
  double diagnostics = 0.0;
};

struct FitReport {
  MultiIndex N;
  CoeffTensor coeffs;
  MomentTensor moments;
  double residual_max = 0.0;
  double block_mismatch_max = 0.0;
  double condition_estimate = 1.0;
  bool ill_conditioned = false;
  bool extended = false;
  std::size_t clamped_sections = 0;
  // Analytic mode: max |int_B g~ - d_B| over the fixed reference grid.
  double weak_star_mismatch = std::numeric_limits<double>::quiet_NaN();
  int reference_blocks = 0;
  // Dyadic mode: entry l is the level-l mismatch, l = 0..depth.
  std::vector<double> nesting_residuals;
  Timings timings;
};

// Exact for polynomial g with exponents below N, solved about p.center.
FitReport fit_polynomial(const ImplicitProblem& p, const MultiIndex& N);

// One fit per N (same N on every axis), solved on [-1,1]^n and re-expanded
// about p.center. The schedule must be strictly increasing.
std::vector<FitReport> fit_analytic(const ImplicitProblem& p, const std::vector<int>& schedule);

// Fit on the 2^depth grid with nesting residuals for every coarser level.
FitReport fit_dyadic(const ImplicitProblem& p, int depth);

// Smallest m >= 3 sharing no factor with any N of the schedule.
int coprime_reference(const std::vector<int>& schedule);

// Validation points: `per_axis` cell midpoints along every axis of R.
std::vector<std::vector<double>> validation_grid(const Rect& R, int per_axis);
int default_validation_points(std::size_t dim);

struct SurfaceSample {
  std::vector<double> x;
  double g = 0.0;         // g~(x) clamped into I
  double residual = 0.0;  // f(x, g)
};

std::vector<SurfaceSample> sample_surface(const ImplicitProblem& p, const CoeffTensor& c, int per_axis);

// max |f(x, clamp_I(g~(x)))| over the validation grid.
double residual_report(const ImplicitProblem& p, const CoeffTensor& c, int grid_points);

// max_alpha |int_{R_alpha} g~ - d_alpha| by closed-form integration.
double block_mismatch(const CoeffTensor& c, const MomentTensor& d);

// Free-text summary of a fit.
void write_report(std::ostream& os, const FitReport& r);
// Columns x1,..,xn,g,residual.
void write_surface_csv(std::ostream& os, const std::vector<SurfaceSample>& s);

}  // namespace ifit
