#pragma once

#include <stdexcept>
#include <string>

namespace slab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative evaluation did not reach its tolerance within max_iter.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A requested moment does not exist (tail index too small).
class InfiniteMomentError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of probability zero.
class NullEventError : public Error {
 public:
  using Error::Error;
};

/// The modeled queue has load >= 1.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double rho) : Error(what), rho_(rho) {}
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// Broken internal bookkeeping; indicates a bug, never a user error.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace slab
