#pragma once

#include <stdexcept>
#include <string>

namespace ifit {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a sampled hypothesis check (single jump, admissible order)
// fails and the caller did not ask to continue anyway.
class VerificationError : public Error {
public:
  using Error::Error;
};

}  // namespace ifit
