#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rul {

// Error hierarchy. The CLI maps each family to an exit code:
// UsageError -> 2, DataError (incl. ParseError) -> 3, TrainingError -> 4.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shape incompatibility; message names the op and both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// CSV/JSON parse failure. `row` is the 1-based data row (0 when not row-specific).
class ParseError : public DataError {
public:
    ParseError(const std::string& path, std::size_t row, const std::string& what)
        : DataError(path + (row ? ":row " + std::to_string(row) : std::string{}) + ": " + what),
          row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace rul
