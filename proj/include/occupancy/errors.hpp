// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace occupancy {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidPath : public Error {
public:
    using Error::Error;
};

// Raised when (alpha, omega, beta) violates monotonicity or conservation.
class InfeasibleInput : public Error {
public:
    InfeasibleInput(std::string condition, const std::string& detail)
        : Error(condition + ": " + detail), condition_(std::move(condition)) {}
    const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class DegenerateSplit : public Error {
public:
    using Error::Error;
};

class UnsupportedConstraintFamily : public Error {
public:
    using Error::Error;
};

class BoundaryEvaluation : public Error {
public:
    using Error::Error;
};

class InfeasibleTruncation : public Error {
public:
    using Error::Error;
};

}  // namespace occupancy
