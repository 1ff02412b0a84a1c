#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twoview {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

class UnknownSymbolError : public Error {
public:
    explicit UnknownSymbolError(const std::string& symbol, const std::string& context = {})
        : Error("unknown symbol '" + symbol + "'" + (context.empty() ? "" : " (" + context + ")")),
          symbol_(symbol) {}

    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

/// Shapes of two operands disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid variant / hyperparameter combination, detected before any work.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnsupportedVariantError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed checkpoint, or a checkpoint that does not belong to the dataset.
class CheckpointError : public Error {
public:
    using Error::Error;
};

}  // namespace twoview
