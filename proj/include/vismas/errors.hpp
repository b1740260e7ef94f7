#pragma once

#include <stdexcept>
#include <string>

namespace vismas {

/// Malformed or degenerate input (bad polygon, rate < 1, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A criterion or contribution produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A message or contribution violated the blackboard / session contract.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Direction requested between two coincident points.
class DegenerateDirectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace vismas
