#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "cqforce/linalg/operator.hpp"

namespace cqforce::linalg {

/// Rounds x to the nearest multiple of 2^-bits (ties to even).
inline double quantize(double x, int bits) {
    return std::ldexp(std::nearbyint(std::ldexp(x, bits)), -bits);
}

inline Matrix quantize(const Matrix& m, int bits) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = Scalar(quantize(m(i, j).real(), bits), quantize(m(i, j).imag(), bits));
    return out;
}

/// Exact representation of a finite double as mantissa * 2^exponent with an odd
/// mantissa (or zero).
struct Dyadic {
    std::int64_t mantissa = 0;
    int exponent = 0;

    double value() const { return std::ldexp(static_cast<double>(mantissa), exponent); }
};

inline Dyadic to_dyadic(double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite value cannot be stored exactly");
    if (x == 0.0) return {0, 0};
    int e = 0;
    const double frac = std::frexp(x, &e);
    std::int64_t m = static_cast<std::int64_t>(std::ldexp(frac, 53));
    e -= 53;
    while ((m & 1) == 0) {
        m /= 2;
        ++e;
    }
    return {m, e};
}

inline double from_dyadic(std::int64_t mantissa, int exponent) {
    return std::ldexp(static_cast<double>(mantissa), exponent);
}

}  // namespace cqforce::linalg
