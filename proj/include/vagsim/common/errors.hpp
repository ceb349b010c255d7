#pragma once

#include <stdexcept>
#include <string>

namespace vagsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

/// A fracture rectangle could not be matched by mesh faces.
class ConformityError : public MeshError {
public:
    using MeshError::MeshError;
};

/// Degenerate or inverted geometry (zero volume, non star-shaped cell, ...).
class GeometryError : public MeshError {
public:
    using MeshError::MeshError;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    int line() const noexcept { return line_; }

private:
    int line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Thermodynamic state outside the validity range of a fluid correlation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// No admissible phase set for a state; the caller is expected to cut the time step.
class FlashError : public Error {
public:
    using Error::Error;
};

/// Singular local block met during closure or cell elimination.
class EliminationError : public Error {
public:
    EliminationError(const std::string& what, int dof) : Error(what), dof_(dof) {}
    int dof() const noexcept { return dof_; }

private:
    int dof_;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class PartitionError : public Error {
public:
    using Error::Error;
};

} // namespace vagsim
