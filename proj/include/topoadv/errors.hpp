#pragma once

#include <stdexcept>
#include <string>

namespace topoadv {

// Bad or inconsistent inputs (files, shapes, parameter ranges). CLI exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: degenerate configurations, non-convergence. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateConfigError : public NumericError {
public:
    DegenerateConfigError(const std::string& msg, int i, int j)
        : NumericError(msg), vertex_i(i), vertex_j(j) {}
    int vertex_i;
    int vertex_j;
};

} // namespace topoadv
