#pragma once

#include <stdexcept>
#include <string>

namespace perihom {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration, incommensurate grids, bad parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structural condition on the kernel or the medium (C1-C5) failed.
class ConditionViolation : public Error {
public:
    ConditionViolation(std::string condition, const std::string& what)
        : Error(condition + ": " + what), condition_(std::move(condition)) {}
    const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

/// Right-hand side of a periodic cell problem has nonzero space-time mean.
class CompatibilityViolation : public Error {
public:
    CompatibilityViolation(double defect, double tolerance)
        : Error("compatibility violated: |mean(theta)| = " + std::to_string(defect) +
                " exceeds " + std::to_string(tolerance)),
          defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

class NonConvergence : public Error {
public:
    NonConvergence(int iterations, double residual)
        : Error("periodic solve did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class PositivityViolation : public Error {
public:
    explicit PositivityViolation(double min_eigenvalue)
        : Error("effective matrix is not positive definite (min eigenvalue " +
                std::to_string(min_eigenvalue) + ")"),
          min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

/// Explicit time step too large for the bounded generator.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// Discrete quadrature produced a value that should vanish identically.
class QuadratureDiagnostic : public Error {
public:
    using Error::Error;
};

/// Monte Carlo run too inefficient to be trusted (acceptance below the floor).
class MonteCarloDiagnostic : public Error {
public:
    using Error::Error;
};

}  // namespace perihom
