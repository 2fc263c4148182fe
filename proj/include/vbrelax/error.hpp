// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace vbrelax {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (negative rate, bad state).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// 3*omega + gamma == 0: no relaxation, T1 is unbounded.
class InfiniteT1 : public Error {
public:
    InfiniteT1() : Error("3*omega + gamma is zero; T1 is infinite") {}
};

/// Unknown key, missing field or out-of-range value in a run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input file violating its table schema. `row` is 1-based, counting the header.
class SchemaError : public Error {
public:
    SchemaError(std::string path, std::size_t row, const std::string& what)
        : Error(path + (row ? ":" + std::to_string(row) : std::string{}) + ": " + what),
          path_(std::move(path)), row_(row) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string path_;
    std::size_t row_;
};

/// A fit or peak search could not produce a result.
class FitError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vbrelax
