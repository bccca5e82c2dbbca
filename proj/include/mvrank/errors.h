#ifndef MVRANK_ERRORS_H_
#define MVRANK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mvrank {

// Base of every error raised by the library. Subclasses name the failure
// category so callers (and the CLI) can map them to diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Caller passed an argument outside the operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

// Object used out of sequence (e.g. a forward cache from another network).
class StateError : public Error {
 public:
  using Error::Error;
};

// Factorization or solve failed on numerically unsuitable operands.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Data content makes the request meaningless (e.g. empty view intersection).
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file content.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Manifest references something that does not exist.
class ManifestError : public Error {
 public:
  using Error::Error;
};

// A file written by an incompatible format version.
class FormatVersionError : public Error {
 public:
  using Error::Error;
};

// Training could not make progress at all.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvrank

#endif  // MVRANK_ERRORS_H_
