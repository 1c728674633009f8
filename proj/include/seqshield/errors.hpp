#pragma once

#include <stdexcept>
#include <string>

namespace seqshield {

// Malformed scenario or config text.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input that breaks a model invariant.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace seqshield
