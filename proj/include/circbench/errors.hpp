#pragma once

#include <stdexcept>
#include <string>

namespace circbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// netgen / ir
class InvalidSpec : public Error {
 public:
  using Error::Error;
};
class StructuralError : public Error {
 public:
  using Error::Error;
};
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
class VersionError : public Error {
 public:
  using Error::Error;
};
class NonlinearResidue : public Error {
 public:
  using Error::Error;
};
class UnsupportedStrict : public Error {
 public:
  using Error::Error;
};
class UnsupportedFeature : public Error {
 public:
  using Error::Error;
};

// linsolve
class SingularSystem : public Error {
 public:
  using Error::Error;
};
class NotSquare : public Error {
 public:
  using Error::Error;
};
class HasDisjunctions : public Error {
 public:
  using Error::Error;
};
class MissingVariable : public Error {
 public:
  using Error::Error;
};

// interval
class DivergentEnclosure : public Error {
 public:
  using Error::Error;
};
class SizeCap : public Error {
 public:
  using Error::Error;
};

// modes / opt
class ExplosionGuard : public Error {
 public:
  ExplosionGuard(const std::string& what, unsigned long long count)
      : Error(what), count_(count) {}
  unsigned long long count() const { return count_; }

 private:
  unsigned long long count_;
};
class Unsatisfiable : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// symbolic
class SingularSymbolic : public Error {
 public:
  using Error::Error;
};
class DenominatorZero : public Error {
 public:
  using Error::Error;
};
class DenominatorStraddlesZero : public Error {
 public:
  using Error::Error;
};

}  // namespace circbench
