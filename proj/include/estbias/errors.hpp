#pragma once

#include <stdexcept>
#include <string>

namespace estbias {

/// Invalid argument to a computation (non-positive effort, bad parameter, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed textual input: CSV rows, distribution specs, grid specs.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric solver could not produce an answer (e.g. no sign change found).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace estbias
