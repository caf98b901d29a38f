#pragma once

#include <stdexcept>
#include <string>

namespace herofilter {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset files missing or unparsable.
struct FormatError : Error {
  using Error::Error;
};

// Row/column/length disagreement between related containers.
struct ShapeError : Error {
  using Error::Error;
};

// Node, class or split id outside its valid range.
struct IndexError : Error {
  using Error::Error;
};

// Requested size exceeds what the input can provide (e.g. p > n).
struct SizeError : Error {
  using Error::Error;
};

// Invalid generator or configuration parameter.
struct ParamError : Error {
  using Error::Error;
};

// Iterative method failed to converge, or a solve broke down.
struct NumericalError : Error {
  using Error::Error;
};

// Input is degenerate for the requested quantity (all-zero filter,
// empty mask, undefined cosine, ...).
struct DegenerateError : Error {
  using Error::Error;
};

// A zero eigenvalue where the construction divides by lambda^k.
struct SingularSpectrumError : Error {
  using Error::Error;
};

// Tape/state reuse that no longer matches the model.
struct StateError : Error {
  using Error::Error;
};

// Caller violated a documented precondition (e.g. g outside [0,1]).
struct PreconditionError : Error {
  using Error::Error;
};

// Filesystem read/write failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace herofilter
