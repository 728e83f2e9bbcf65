#pragma once

#include <functional>
#include <span>

namespace ifit {

// A real function of a point (independent coordinates first, the dependent
// coordinate last). Must be safe to call concurrently.
using ScalarField = std::function<double(std::span<const double>)>;

}  // namespace ifit
