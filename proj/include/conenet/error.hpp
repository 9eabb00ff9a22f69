#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conenet {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (non-finite input, empty rectangle).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A layer produced non-finite pre-activations during a forward pass.
class NonFiniteLayerError : public DomainError {
public:
    NonFiniteLayerError(const std::string& what, std::size_t layer)
        : DomainError(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}

    [[nodiscard]] std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

/// Malformed serialized data. `offset()` is the byte position where decoding failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Input violates a documented precondition (labels not one-hot, bad radii, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Text input could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// A loss or gradient became non-finite during training.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& what, std::size_t layer)
        : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}

    [[nodiscard]] std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

/// The activation has an empty zero set, so a neuron has no decision boundary.
class NoBoundaryError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace conenet
