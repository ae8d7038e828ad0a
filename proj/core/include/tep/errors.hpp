#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tep {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent user data. The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class DegenerateInputError : public InputError {
public:
    using InputError::InputError;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

/// A CSV or config file that does not match its schema. Row and column are
/// 1-based; column 0 means the whole row.
class ParseError : public InputError {
public:
    ParseError(std::string file, std::size_t row, std::size_t column, const std::string& what);

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t row_;
    std::size_t column_;
};

class ValidationError : public InputError {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Failures of the numerics. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NonconvergenceError : public NumericalError {
public:
    NonconvergenceError(const std::string& what, int iterations, double primal_residual,
                        double dual_residual, double complementarity);

    int iterations() const noexcept { return iterations_; }
    double primal_residual() const noexcept { return primal_; }
    double dual_residual() const noexcept { return dual_; }
    double complementarity() const noexcept { return complementarity_; }

private:
    int iterations_;
    double primal_;
    double dual_;
    double complementarity_;
};

/// A compensation mechanism whose calibration equation is singular.
class CalibrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Welfare accounting was asked to process a point that is not an equilibrium.
class NonEquilibriumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace tep
