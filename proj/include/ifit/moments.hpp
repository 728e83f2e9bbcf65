#pragma once

#include <cstddef>
#include <ostream>

#include "ifit/bracket.hpp"
#include "ifit/field.hpp"
#include "ifit/geometry.hpp"
#include "ifit/tensor.hpp"

namespace ifit {

// d_alpha = integral of g over block alpha, stored 0-based in grid order.
struct MomentTensor {
  Tensor values;
  Grid grid;
  Orientation orientation = Orientation::Increasing;
  Interval codomain;
  std::size_t clamped_nodes = 0;  // sections without a jump (force mode only)

  double at(const MultiIndex& alpha) const { return values[grid.linear(alpha)]; }
};

struct MomentOptions {
  int quad_order = 12;
  double bisect_tol = 1e-13;
  unsigned threads = 1;
  bool clamp = false;  // sections without a sign change take the endpoint of I
};

// Midpoint rule for the integral of Theta(sign_y f) over block x I, with
// `nodes_per_axis` cells along every axis including the y axis.
double theta_volume(const ScalarField& f, const Rect& block, const Interval& I, int nodes_per_axis);

// Gauss-Legendre quadrature of x -> locate_jump(f, x, I) on every block.
MomentTensor moment(const ScalarField& f, const Grid& grid, const Interval& I, Orientation orient,
                    const MomentOptions& options = {});

// d from block volumes v: (1+n)/2 |R_a| max I + (1-n)/2 |R_a| min I - n v.
MomentTensor assemble_from_volume(const Tensor& v, const Grid& grid, const Interval& I, Orientation orient);

// Volumes for every block of the grid, in grid order.
Tensor theta_volumes(const ScalarField& f, const Grid& grid, const Interval& I, int nodes_per_axis,
                     unsigned threads = 1);

// Columns a1,..,an,value with 1-based block indices.
void write_csv(std::ostream& os, const MomentTensor& m);

}  // namespace ifit
