#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcp {

// Dense row-major matrix of 32-bit reals.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

// Inner product accumulated in double; a and b are contiguous ranges of equal length.
template <typename A, typename B>
double dot(const A& a, const B& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += static_cast<double>(a[k]) * static_cast<double>(b[k]);
    return s;
}

template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        s += d * d;
    }
    return s;
}

} // namespace pcp
