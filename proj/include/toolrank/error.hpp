#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toolrank {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Carries the source location so the
/// CLI can report "file:line: field: message".
class DataError : public Error {
 public:
  DataError(std::string file, std::size_t line, std::string field, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
  std::string detail_;
};

/// A required id (api, tool, query, vector, score pair) could not be resolved.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or generator settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace toolrank
