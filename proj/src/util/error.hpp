#pragma once

#include <stdexcept>
#include <string>

namespace cea {

// Error categories map 1:1 to process exit codes and C API status codes.
enum class ErrorKind {
  validation = 2,
  convergence = 3,
  io = 4,
  internal = 5,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int code() const { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

inline Error validation_error(std::string msg) { return Error(ErrorKind::validation, std::move(msg)); }
inline Error convergence_error(std::string msg) { return Error(ErrorKind::convergence, std::move(msg)); }
inline Error io_error(std::string msg) { return Error(ErrorKind::io, std::move(msg)); }
inline Error internal_error(std::string msg) { return Error(ErrorKind::internal, std::move(msg)); }

}  // namespace cea
