#pragma once

#include <stdexcept>
#include <string>

namespace cspec {

enum class ErrorCode {
    invalid_argument = 1,
    parse = 2,
    solver = 3,
    io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

/// Raised when an iterative solver exhausts its budget; carries the best residual reached.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(ErrorCode::solver, what + " (best residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace cspec
