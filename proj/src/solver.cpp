#include "ifit/solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "ifit/format.hpp"
#include "ifit/parallel.hpp"

namespace ifit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MomentOptions moment_options(const FitOptions& o) {
  return MomentOptions{o.quad_order, o.bisect_tol, o.threads, o.clamp};
}

RecoveryOptions recovery_options(const FitOptions& o) {
  RecoveryOptions r;
  r.extended_threshold = o.extended_threshold;
  r.cond_warn = o.cond_warn;
  return r;
}

MomentTensor moments_on(const ImplicitProblem& p, const MultiIndex& N) {
  return moment(p.f, Grid(p.R, N), p.I, p.orientation, moment_options(p.options));
}

// Solve for the coefficients on `grid`. With `normalized`, the moments are
// mapped to [-1,1]^n, solved about the origin and re-expanded about p.center.
Recovery solve(const ImplicitProblem& p, const MomentTensor& m, bool normalized) {
  const Grid& grid = m.grid;
  const std::size_t n = grid.dim();
  std::vector<ModeMatrix> modes;
  RecoveryOptions ropt = recovery_options(p.options);
  if (!normalized) {
    for (std::size_t k = 0; k < n; ++k) modes.push_back(vandermonde(grid, p.center, k));
    return recover_coefficients(m.values, modes, p.R, ropt);
  }
  const AffineMap map = normalize(p.R);
  const double jac = map.jacobian();
  Tensor dn = m.values;
  for (std::size_t i = 0; i < dn.size(); ++i) dn[i] *= jac;
  for (std::size_t k = 0; k < n; ++k)
    modes.push_back(vandermonde(-1.0, 2.0 / grid.counts()[k], 0.0, grid.counts()[k], k));
  ropt.reexpand = Reexpansion{map.scale, map.shift, p.center};
  return recover_coefficients(dn, modes, p.R, ropt);
}

FitReport fit_on_grid(const ImplicitProblem& p, const MultiIndex& N, bool normalized) {
  FitReport r;
  r.N = N;
  auto t0 = Clock::now();
  r.moments = moments_on(p, N);
  r.clamped_sections = r.moments.clamped_nodes;
  r.timings.moments = seconds_since(t0);

  t0 = Clock::now();
  Recovery rec = solve(p, r.moments, normalized);
  r.timings.solve = seconds_since(t0);
  r.coeffs = std::move(rec.coeffs);
  r.condition_estimate = rec.condition_estimate;
  r.ill_conditioned = rec.ill_conditioned;
  r.extended = rec.extended;

  t0 = Clock::now();
  r.block_mismatch_max = block_mismatch(r.coeffs, r.moments);
  r.residual_max = residual_report(p, r.coeffs, p.options.validation_points);
  r.timings.diagnostics = seconds_since(t0);
  return r;
}

}  // namespace

ImplicitProblem make_problem(ScalarField f, Rect R, Interval I, std::vector<double> center, FitOptions options,
                             std::string label, std::optional<Orientation> orient) {
  if (center.size() != R.dim()) throw GeometryError("center dimension does not match R");
  if (!R.contains(center)) throw GeometryError("center (" + join(center) + ") lies outside R");
  if (options.quad_order < 1) throw Error("quadrature order must be positive");
  if (!(options.bisect_tol > 0.0)) throw Error("bisection tolerance must be positive");
  ImplicitProblem p{std::move(f), std::move(label), std::move(R), I, std::move(center), Orientation::Increasing,
                    options};
  p.orientation = orient ? *orient
                         : orientation(p.f, p.R, p.I, options.orientation_samples, options.seed, options.clamp);
  return p;
}

FitReport fit_polynomial(const ImplicitProblem& p, const MultiIndex& N) {
  if (N.size() != p.R.dim()) throw GeometryError("N has " + std::to_string(N.size()) + " entries for a " +
                                                 std::to_string(p.R.dim()) + "-dimensional R");
  return fit_on_grid(p, N, false);
}

int coprime_reference(const std::vector<int>& schedule) {
  for (int m = 3;; ++m) {
    bool ok = true;
    for (int N : schedule)
      if (std::gcd(m, N) != 1) ok = false;
    if (ok) return m;
  }
}

std::vector<FitReport> fit_analytic(const ImplicitProblem& p, const std::vector<int>& schedule) {
  if (schedule.empty()) throw Error("analytic schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw Error("analytic schedule entries must be positive");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw Error("analytic schedule must be strictly increasing");
  }
  const std::size_t n = p.R.dim();
  const int m = p.options.reference_blocks > 0 ? p.options.reference_blocks : coprime_reference(schedule);
  const MomentTensor reference = moments_on(p, MultiIndex::filled(n, m));

  std::vector<FitReport> out;
  for (int N : schedule) {
    FitReport r = fit_on_grid(p, MultiIndex::filled(n, N), true);
    const auto t0 = Clock::now();
    r.weak_star_mismatch = block_mismatch(r.coeffs, reference);
    r.reference_blocks = m;
    r.timings.diagnostics += seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

FitReport fit_dyadic(const ImplicitProblem& p, int depth) {
  if (depth < 1) throw Error("dyadic depth must be at least 1");
  if (depth > 16) throw Error("dyadic depth above 16 is not supported");
  const std::size_t n = p.R.dim();
  FitReport r = fit_on_grid(p, MultiIndex::filled(n, 1 << depth), true);
  const auto t0 = Clock::now();
  for (int level = 0; level <= depth; ++level) {
    if (level == depth) {
      r.nesting_residuals.push_back(r.block_mismatch_max);
      break;
    }
    r.nesting_residuals.push_back(block_mismatch(r.coeffs, moments_on(p, MultiIndex::filled(n, 1 << level))));
  }
  r.timings.diagnostics += seconds_since(t0);
  return r;
}

int default_validation_points(std::size_t dim) {
  switch (dim) {
    case 1: return 1001;
    case 2: return 101;
    case 3: return 21;
    default: return 9;
  }
}

std::vector<std::vector<double>> validation_grid(const Rect& R, int per_axis) {
  const std::size_t n = R.dim();
  if (per_axis < 1) per_axis = 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<std::size_t>(per_axis);
  std::vector<std::vector<double>> pts(total, std::vector<double>(n));
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t k = n; k-- > 0;) {
      const auto j = static_cast<double>(rem % per_axis);
      rem /= per_axis;
      pts[i][k] = R.lo(k) + (j + 0.5) * R.width(k) / per_axis;
    }
  }
  return pts;
}

std::vector<SurfaceSample> sample_surface(const ImplicitProblem& p, const CoeffTensor& c, int per_axis) {
  if (per_axis <= 0) per_axis = default_validation_points(p.R.dim());
  auto pts = validation_grid(p.R, per_axis);
  std::vector<SurfaceSample> out(pts.size());
  parallel_for(pts.size(), p.options.threads, [&](std::size_t i) {
    SurfaceSample s;
    s.x = std::move(pts[i]);
    s.g = p.I.clamp(c.evaluate(s.x));
    std::vector<double> xy = s.x;
    xy.push_back(s.g);
    s.residual = p.f(xy);
    out[i] = std::move(s);
  });
  return out;
}

double residual_report(const ImplicitProblem& p, const CoeffTensor& c, int grid_points) {
  double worst = 0.0;
  for (const auto& s : sample_surface(p, c, grid_points)) {
    const double r = std::fabs(s.residual);
    if (!(r <= worst)) worst = r;  // NaN propagates
  }
  return worst;
}

double block_mismatch(const CoeffTensor& c, const MomentTensor& d) {
  double worst = 0.0;
  std::size_t i = 0;
  for (const MultiIndex& alpha : d.grid.indices()) {
    const double e = std::fabs(integrate(c, d.grid.block(alpha)) - d.values[i++]);
    if (!(e <= worst)) worst = e;
  }
  return worst;
}

void write_report(std::ostream& os, const FitReport& r) {
  os << "N = " << r.N.to_string() << "\n";
  os << "center = (" << join(r.coeffs.center) << ")\n";
  os << "residual_max = " << format_double(r.residual_max) << "\n";
  os << "block_mismatch_max = " << format_double(r.block_mismatch_max) << "\n";
  os << "condition_estimate = " << format_double(r.condition_estimate) << "\n";
  os << "ill_conditioned = " << (r.ill_conditioned ? "yes" : "no") << "\n";
  os << "extended_precision = " << (r.extended ? "yes" : "no") << "\n";
  os << "clamped_sections = " << r.clamped_sections << "\n";
  if (r.reference_blocks > 0) {
    os << "weak_star_reference = " << r.reference_blocks << "\n";
    os << "weak_star_mismatch = " << format_double(r.weak_star_mismatch) << "\n";
  }
  for (std::size_t l = 0; l < r.nesting_residuals.size(); ++l)
    os << "nesting_level_" << l << " = " << format_double(r.nesting_residuals[l]) << "\n";
  os << "time_moments_s = " << format_double(r.timings.moments) << "\n";
  os << "time_solve_s = " << format_double(r.timings.solve) << "\n";
  os << "time_diagnostics_s = " << format_double(r.timings.diagnostics) << "\n";
}

void write_surface_csv(std::ostream& os, const std::vector<SurfaceSample>& s) {
  const std::size_t n = s.empty() ? 0 : s.front().x.size();
  for (std::size_t k = 0; k < n; ++k) os << "x" << (k + 1) << ",";
  os << "g,residual\n";
  for (const auto& v : s) {
    for (double x : v.x) os << format_double(x) << ",";
    os << format_double(v.g) << "," << format_double(v.residual) << "\n";
  }
}

}  // namespace ifit
