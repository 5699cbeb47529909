#pragma once

#include <stdexcept>
#include <string>

namespace wolfbench {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorClass {
  config,       // bad parameters, malformed or invalid files
  calibration,  // adaptive policy missing or unable to produce a threshold
  mode,         // evaluation mode incompatible with the population
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

class DimensionError : public ConfigError {
 public:
  explicit DimensionError(const std::string& what) : ConfigError(what) {}
};

/// A masked comparison where no bit position is available on both sides.
class NoComparableBitsError : public ConfigError {
 public:
  NoComparableBitsError() : ConfigError("no comparable bits (joint mask is empty)") {}
};

class ParseError : public ConfigError {
 public:
  explicit ParseError(const std::string& what) : ConfigError(what) {}
};

class ValidationError : public ConfigError {
 public:
  explicit ValidationError(const std::string& what) : ConfigError(what) {}
};

class DegenerateFitError : public ConfigError {
 public:
  explicit DegenerateFitError(const std::string& what) : ConfigError(what) {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error(ErrorClass::calibration, what) {}
};

class ModeError : public Error {
 public:
  explicit ModeError(const std::string& what) : Error(ErrorClass::mode, what) {}
};

}  // namespace wolfbench
