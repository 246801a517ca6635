#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sawr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (cyclic trees, empty corpora, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyDataError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class PathError : public Error {
 public:
  using Error::Error;
};

}  // namespace sawr
