#ifndef ERGMCAL_ERRORS_HPP_
#define ERGMCAL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ergmcal {

/// Broad failure classes. The CLI maps each onto a process exit code.
enum class ErrorKind {
    Config,       ///< invalid or incomplete run configuration
    Data,         ///< unreadable input, model/data mismatch, bad indices
    Numerical,    ///< Cholesky failure, separation, non-finite density
    NonConvergence,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Node index out of range or non-canonical dyad.
class StructuralError : public Error {
  public:
    explicit StructuralError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A model term references data the graph does not carry.
class ModelDataMismatch : public Error {
  public:
    explicit ModelDataMismatch(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DataError : public Error {
  public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Non-finite parameter or density value.
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Matrix expected to be negative (or positive) definite is not.
class NotDefiniteError : public Error {
  public:
    explicit NotDefiniteError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// The estimate runs off to infinity, which for logistic-type problems means
/// the response is (quasi-)separated and no finite maximiser exists.
class SeparationError : public Error {
  public:
    explicit SeparationError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Simulated graphs pile up at the empty or complete graph.
class DegeneracyError : public Error {
  public:
    explicit DegeneracyError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// An exact-oracle comparison failed.
class VerificationError : public Error {
  public:
    explicit VerificationError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class NonConvergenceError : public Error {
  public:
    explicit NonConvergenceError(const std::string& what) : Error(ErrorKind::NonConvergence, what) {}
};

}  // namespace ergmcal

#endif  // ERGMCAL_ERRORS_HPP_
