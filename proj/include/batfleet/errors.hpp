#pragma once

#include <stdexcept>
#include <string>

namespace batfleet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad range, unknown key, ...).
class InputError : public Error
{
public:
  using Error::Error;
};

/// Input is well-formed but carries no information to work with
/// (equal temperatures, collinear regression data, empty curve).
class DegenerateInputError : public InputError
{
public:
  using InputError::InputError;
};

/// The planning instance cannot be satisfied.
class InfeasibleModelError : public Error
{
public:
  using Error::Error;
};

/// Numerical trouble inside the LP / MILP engine.
class SolverError : public Error
{
public:
  using Error::Error;
};

} // namespace batfleet
