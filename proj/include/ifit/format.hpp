#pragma once

#include <span>
#include <string>

namespace ifit {

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

// Values joined with `sep`, each formatted by format_double.
std::string join(std::span<const double> values, const std::string& sep = ", ");

}  // namespace ifit
