#pragma once

#include <stdexcept>
#include <string>

namespace entangled {

enum class ErrorKind {
  InvalidInput,
  InvalidGraph,
  InvalidConfig,
  ZeroVarianceColumn,
  NegativeWeight,
  EigenFailure,
  DegenerateDenominator,
  ECNoConvergence,
  EmptyGraph,
  ShapeMismatch,
  NoNegatives,
  SingleClassBatch,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace entangled
