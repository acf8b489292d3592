#pragma once

#include <stdexcept>
#include <string>

namespace dsm {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidParameters : public Error {
public:
  using Error::Error;
};

class DimensionOverflow : public Error {
public:
  using Error::Error;
};

class SectorMismatch : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

private:
  int iterations_;
};

class DegenerateBreakdown : public Error {
public:
  using Error::Error;
};

class InsufficientStates : public Error {
public:
  using Error::Error;
};

class UnphysicalVarsigma : public Error {
public:
  using Error::Error;
};

class RootNotBracketed : public Error {
public:
  using Error::Error;
};

class InsufficientPoints : public Error {
public:
  using Error::Error;
};

class NonPositiveObservable : public Error {
public:
  using Error::Error;
};

class WindowEmpty : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace dsm
