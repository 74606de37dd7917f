#pragma once

#include <stdexcept>
#include <string>

namespace crackle {

// Process exit codes, one per error family. The CLI maps a caught error
// to the numeric value of its family.
enum class ErrorFamily : int {
    config = 1,
    io = 2,
    data = 3,
    training = 4,
    internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& message)
        : std::runtime_error(message), family_(family) {}

    ErrorFamily family() const noexcept { return family_; }
    int exit_code() const noexcept { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
};

// --- config family ------------------------------------------------------

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error(ErrorFamily::config, m) {}
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& m) : Error(ErrorFamily::config, m) {}
};

// --- io family ----------------------------------------------------------

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error(ErrorFamily::io, m) {}
};

// --- data family --------------------------------------------------------

class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class UnsupportedFormatError : public DecodeError {
public:
    explicit UnsupportedFormatError(const std::string& m) : DecodeError(m) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& m, long line)
        : Error(ErrorFamily::data, m + " (line " + std::to_string(line) + ")"),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class EmptyInputError : public Error {
public:
    EmptyInputError(const std::string& m, std::size_t length)
        : Error(ErrorFamily::data, m + " (length " + std::to_string(length) + ")"),
          length_(length) {}

    std::size_t length() const noexcept { return length_; }

private:
    std::size_t length_;
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class CapacityError : public Error {
public:
    CapacityError(const std::string& m, std::size_t achievable)
        : Error(ErrorFamily::data,
                m + " (achievable: " + std::to_string(achievable) + ")"),
          achievable_(achievable) {}

    std::size_t achievable() const noexcept { return achievable_; }

private:
    std::size_t achievable_;
};

class ReferenceError : public Error {
public:
    explicit ReferenceError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class ValueRangeError : public Error {
public:
    explicit ValueRangeError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class TransformError : public Error {
public:
    explicit TransformError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class SplitError : public Error {
public:
    explicit SplitError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class FoldingError : public Error {
public:
    explicit FoldingError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

// --- training family ----------------------------------------------------

class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& m) : Error(ErrorFamily::training, m) {}
};

class ConvergenceError : public TrainingError {
public:
    ConvergenceError(const std::string& m, std::size_t iterations, double residual)
        : TrainingError(m + " after " + std::to_string(iterations) +
                        " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

// --- persistence --------------------------------------------------------

class FormatVersionError : public Error {
public:
    explicit FormatVersionError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& m) : Error(ErrorFamily::data, m) {}
};

// --- internal -----------------------------------------------------------

class InternalError : public Error {
public:
    explicit InternalError(const std::string& m) : Error(ErrorFamily::internal, m) {}
};

}  // namespace crackle
