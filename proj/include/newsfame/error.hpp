#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace newsfame {

enum class ErrorCode {
    invalid_argument,
    insufficient_data,
    degenerate_sample,
    non_convergence,
    missing_member,
    untrainable,
    parse_error,
    io_error,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every library failure. The code is stable and is what
/// the CLI reports in its machine-readable error object.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when an iterative fit exhausts its budget. Carries the best iterate
/// seen so the caller can still inspect or use it.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> best, double residual)
        : Error(ErrorCode::non_convergence, what), best_(std::move(best)), residual_(residual) {}

    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

} // namespace newsfame
