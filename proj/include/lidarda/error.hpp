// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lidarda {

// Error categories map 1:1 onto CLI exit codes (see README).
enum class ErrorKind { validation = 1, numeric = 2, io = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(std::string msg)
      : Error(ErrorKind::validation, std::move(msg)) {}
};

class NumericError : public Error {
public:
  explicit NumericError(std::string msg)
      : Error(ErrorKind::numeric, std::move(msg)) {}
};

class IoError : public Error {
public:
  explicit IoError(std::string msg) : Error(ErrorKind::io, std::move(msg)) {}
};

// Malformed file contents (truncation, bad magic). Shares the I/O exit code.
class FormatError : public IoError {
public:
  explicit FormatError(std::string msg) : IoError(std::move(msg)) {}
};

}  // namespace lidarda
