#pragma once

#include <stdexcept>
#include <string>

namespace jcis {

/// Base class for all jcis errors. `exit_code()` is the process exit code
/// the CLI maps the error to (2 = configuration, 3 = data/format,
/// 4 = degenerate statistics).
class error : public std::runtime_error {
public:
    error(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
    [[nodiscard]] int exit_code() const noexcept { return code_; }

private:
    int code_;
};

/// Bad flags, missing mappings, inconsistent options.
class config_error : public error {
public:
    explicit config_error(std::string msg) : error(std::move(msg), 2) {}
};

/// Malformed files, non-finite values, length mismatches.
class data_error : public error {
public:
    explicit data_error(std::string msg) : error(std::move(msg), 3) {}
};

/// Zero-variance inputs, undefined balanced accuracy, no usable cutoff.
class degenerate_error : public error {
public:
    explicit degenerate_error(std::string msg) : error(std::move(msg), 4) {}
};

} // namespace jcis
