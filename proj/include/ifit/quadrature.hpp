#pragma once

#include <vector>

namespace ifit {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes ascending. Rules are computed once per order and cached.
const GaussLegendre& gauss_legendre(int order);

}  // namespace ifit
