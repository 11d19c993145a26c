#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace maho {

/// Requested propagation or boundary-value time sits inside a caustic
/// exclusion zone: the mode determinant D(t) is too close to zero for the
/// closed forms to be evaluated. Carries the offending time, the determinant
/// value and the threshold that tripped.
class CausticError : public std::runtime_error {
public:
    CausticError(double t, double d_value, double threshold)
        : std::runtime_error("caustic at t=" + std::to_string(t) +
                             " (|D|=" + std::to_string(std::abs(d_value)) +
                             " < " + std::to_string(threshold) + ")"),
          t_(t), d_value_(d_value), threshold_(threshold) {}

    double time() const noexcept { return t_; }
    double d_value() const noexcept { return d_value_; }
    double threshold() const noexcept { return threshold_; }

private:
    double t_, d_value_, threshold_;
};

/// An iterative solver failed to reach its tolerance within its budget.
class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// Shortest decimal string that round-trips to exactly the same double.
/// Used for every floating-point field in CSV/JSON artifacts so that
/// identical inputs give byte-identical outputs.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

/// Relative separation of two scalars against an explicit scale floor.
inline double rel_diff(double a, double b, double scale = 1.0) {
    double denom = std::max({std::abs(a), std::abs(b), std::abs(scale)});
    if (denom == 0.0) return 0.0;
    return std::abs(a - b) / denom;
}

} // namespace maho
