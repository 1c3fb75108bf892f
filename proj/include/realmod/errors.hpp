#pragma once

#include <stdexcept>
#include <string>

namespace realmod {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log_su2 evaluated at (or numerically at) -1, where the branch is undefined.
class AntipodeError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Infinitesimal conjugation has rank < 3: the tuple has a common stabilizer.
class DegenerateGauge : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class NotCritical : public Error {
 public:
  using Error::Error;
};

/// Circle action requested where B1 = +-1.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

class UnsupportedTopology : public Error {
 public:
  using Error::Error;
};

class PremiseFailure : public Error {
 public:
  using Error::Error;
};

class IncompleteCertification : public Error {
 public:
  using Error::Error;
};

class UnknownCheck : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace realmod
