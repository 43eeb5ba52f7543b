#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ice {

/// Base of every error raised by the engine. Messages are single-line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Row is 1-based over data rows
/// (the header is row 0); column is the header name when known.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::optional<std::size_t> row = {},
            std::optional<std::string> column = {})
      : Error(message), row_(row), column_(std::move(column)) {}

  const std::optional<std::size_t>& row() const noexcept { return row_; }
  const std::optional<std::string>& column() const noexcept { return column_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::string> column_;
};

/// A name that does not exist in the dataset schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Search could not run or produce a result.
class SearchError : public Error {
 public:
  using Error::Error;
};

}  // namespace ice
