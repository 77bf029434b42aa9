#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conjlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a curvature-form shortcut or another geometric precondition fails.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow or step budget exhausted; carries the parameter where it happened.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t) : Error(what + " at t=" + std::to_string(t)), t_(t) {}
  double t() const { return t_; }

 private:
  double t_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Conjugate-point scan could not separate neighbouring roots.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class BranchError : public Error {
 public:
  using Error::Error;
};

}  // namespace conjlab
