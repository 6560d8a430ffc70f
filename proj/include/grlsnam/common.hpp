#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grlsnam {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch one type at the boundary (CLI, Python bindings).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

class DeadEndError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Gram matrix of feature gradients is (numerically) singular and no ridge
// term was supplied.
class PersistentExcitationError : public SingularSystemError {
 public:
  using SingularSystemError::SingularSystemError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const VecX& v) { return v.allFinite(); }

}  // namespace grlsnam
