#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ifit/field.hpp"
#include "ifit/geometry.hpp"
#include "ifit/solver.hpp"

namespace ifit {

class NoValidOrder : public Error {
public:
  using Error::Error;
};

// Per-stage settings. Stage i (0-based) fits y_i over R x I_0 x .. x I_{i-1}
// with codomain I_i; R and I override those boxes for this stage only.
struct StageSpec {
  std::optional<MultiIndex> N;
  std::optional<std::vector<double>> center;  // defaults to the domain midpoint
  std::optional<Rect> R;                      // n axes
  std::optional<Rect> I;                      // i + 1 axes, y_0..y_i
  bool analytic = false;                      // solve on [-1,1]^d and re-expand
};

// m equations over (x_1..x_n, y_1..y_m).
struct SystemProblem {
  std::vector<ScalarField> equations;
  std::vector<std::string> labels;
  Rect R;
  Rect I;
  // order[i] = equation solved for y_i, 0-based; chosen by sampling if absent.
  std::optional<std::vector<int>> order;
  std::vector<StageSpec> stages;  // empty or one per dependent variable
  FitOptions options;

  std::size_t n() const { return R.dim(); }
  std::size_t m() const { return I.dim(); }
};

struct Stage {
  int equation = 0;
  int variable = 0;
  Rect domain;  // independent box of the surrogate: (x, y_0..y_{i-1})
  Interval codomain;
  std::vector<double> center;
  CoeffTensor surrogate;
  FitReport report;
  JumpReport verification;
};

struct EliminationChain {
  std::size_t n = 0;
  std::vector<int> order;
  std::vector<Stage> stages;  // indexed by dependent variable
};

// Domain, codomain and center of stage i after applying overrides.
struct StageBox {
  Rect domain;
  Interval codomain;
  std::vector<double> center;
};
StageBox stage_box(const SystemProblem& p, std::size_t i);

struct OrderCheck {
  bool ok = true;
  std::vector<std::string> problems;  // one line per failing stage
};

// Samples every stage section with the later variables solved exactly by
// nested bisection (endpoints of I where a section has no jump).
OrderCheck check_order(const SystemProblem& p, const std::vector<int>& order, std::size_t samples = 32,
                       std::size_t scan = 128);

// Greedy assignment from the last variable down; lowest equation index wins.
std::vector<int> choose_order(const SystemProblem& p, std::size_t samples = 32, std::size_t scan = 128);

// Fits h_{order(m)} .. h_{order(1)}, each against the numeric substitution of
// the surrogates already fitted. Throws VerificationError when a stage fails
// the single-jump check unless `force`.
EliminationChain eliminate(const SystemProblem& p, const std::vector<int>& order, bool force = false);

// y_0 = h(x), y_1 = h(x, y_0), ...
std::vector<double> compose(const EliminationChain& chain, std::span<const double> x);

struct SystemResidual {
  std::vector<double> max_abs;  // per equation
  std::size_t out_of_range = 0;  // grid points where some y_i left I_i
  std::size_t points = 0;
};

SystemResidual system_residual(const SystemProblem& p, const EliminationChain& chain, int grid_points = 0);

// Text manifest: order, per-stage domains, centers and N.
void write_manifest(std::ostream& os, const EliminationChain& chain);

}  // namespace ifit
