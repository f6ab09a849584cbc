#ifndef XNLG_ERRORS_HPP
#define XNLG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xnlg {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible shapes or indices out of range.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Input outside the mathematical domain of an operation
// (non-Hermitian where Hermitian is required, non-PSD, invalid game data).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// A combinatorial size bound was exceeded; the operation refuses to start.
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& msg) : Error(msg) {}
};

// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

}  // namespace xnlg

#endif
