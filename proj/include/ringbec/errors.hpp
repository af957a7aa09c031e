#pragma once

#include <stdexcept>
#include <string>

namespace ringbec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class RingTooSmall : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The polar form divides by N_i; callers must fall back to amplitudes.
class PolarSingularity : public Error {
 public:
  using Error::Error;
};

class UndefinedWinding : public Error {
 public:
  using Error::Error;
};

class FormulaDomainError : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class RootNotFound : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class StalledTransfer : public Error {
 public:
  using Error::Error;
};

class MeasurementError : public Error {
 public:
  using Error::Error;
};

class ResampleRequired : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace ringbec
