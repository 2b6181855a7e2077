// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace pforge {

// Error taxonomy mirrored by the CLI exit codes: Config -> 2, Data -> 3,
// Numeric -> 4.
enum class ErrorKind { Config, Data, Numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

// File-format failures carry a machine-checkable code on top of the message.
enum class IoCode {
  BadMagic,
  Truncated,
  ShapePayloadMismatch,
  AxisLabelMismatch,
  SchemaViolation,
};

class IoError : public Error {
public:
  IoError(IoCode code, const std::string& msg)
      : Error(ErrorKind::Data, msg), code_(code) {}

  IoCode code() const { return code_; }

private:
  IoCode code_;
};

namespace detail {
inline void msg_append(std::ostringstream&) {}
template <typename T, typename... Rest>
void msg_append(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  msg_append(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string msg(const Args&... args) {
  std::ostringstream os;
  detail::msg_append(os, args...);
  return os.str();
}

template <typename... Args>
[[noreturn]] void throw_config(const Args&... args) {
  throw Error(ErrorKind::Config, msg(args...));
}

template <typename... Args>
[[noreturn]] void throw_data(const Args&... args) {
  throw Error(ErrorKind::Data, msg(args...));
}

template <typename... Args>
[[noreturn]] void throw_numeric(const Args&... args) {
  throw Error(ErrorKind::Numeric, msg(args...));
}

}  // namespace pforge
