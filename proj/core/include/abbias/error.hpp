#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abbias {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value (bad flag, alpha out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Experiment too short for the requested operation (e.g. leave-one-day-out
/// needs at least two days).
class DurationError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// A treatment or control arm has no (or too few) appearing users in the
/// analysis window.
class DegenerateArmError : public Error {
 public:
  using Error::Error;
};

/// The behavior model is unusable for the requested computation
/// (non-normalized density, no pointwise density at zero, nobody ever
/// appears, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (CSV rows, JSON documents). Messages carry line
/// numbers where available.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A Monte Carlo replication failed; remembers which one.
class ReplicationError : public Error {
 public:
  ReplicationError(int replication, const std::string& what)
      : Error("replication " + std::to_string(replication) + ": " + what),
        replication_(replication) {}

  int replication() const { return replication_; }

 private:
  int replication_;
};

}  // namespace abbias
