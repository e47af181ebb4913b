#pragma once

#include <stdexcept>
#include <string>

namespace chsh {

// Exit codes shared by the CLI: 1 domain error, 2 I/O, 3 solver failure.
enum class ErrorKind { Domain = 1, Io = 2, Solver = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

struct NotNonSignalling : DomainError {
  explicit NotNonSignalling(const std::string& what) : DomainError(what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

}  // namespace chsh
