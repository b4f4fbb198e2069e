#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spikemon {

/// File-format violation; line is 1-based, 0 when no single line applies.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigensolver ran out of iterations; carries the best estimate reached.
class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& msg, double best)
        : std::runtime_error(msg), best_(best) {}
    double best_estimate() const noexcept { return best_; }

private:
    double best_;
};

/// V_m == 0: constant training eigenvalues cannot be monitored.
class DegenerateNormalizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spikemon
