// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tspgnn {

// Error taxonomy. Exit-code mapping for the CLI lives in tools/.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data problems: missing optima, solver capacity exceeded, bad instances.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariants; should never surface in a correct build.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

/// Hex-float rendering: lossless, so file round-trips are bitwise.
inline std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_double(const std::string& token, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": bad real '" + token + "'");
    return v;
}

}  // namespace detail

}  // namespace tspgnn
