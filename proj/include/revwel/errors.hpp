#pragma once

#include <stdexcept>
#include <string>

namespace revwel {

/// Malformed experiment configuration or JSON input.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (root bracketing, hull construction) did not converge.
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Virtual value requested where the density vanishes or is not defined.
class UndefinedDensity : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Expectation requested of a distribution whose mean diverges.
class InfiniteMean : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class NotDownwardClosed : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class NonMonotoneAllocation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// E[g h] or E[h] is not strictly positive.
class DegenerateDenominator : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

}  // namespace revwel
