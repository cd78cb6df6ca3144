#pragma once

#include "doctest.h"
#include "pcp/embedding.hpp"
#include "pcp/error.hpp"
#include "pcp/matrix.hpp"

#include <cmath>
#include <random>
#include <vector>

// Runs `expr` and checks that it raises pcp::Error of the given kind.
#define CHECK_KIND(expr, expected_kind)                                      \
    do {                                                                     \
        bool thrown_ = false;                                                \
        try {                                                                \
            (void)(expr);                                                    \
        } catch (const pcp::Error& e_) {                                     \
            thrown_ = true;                                                  \
            CHECK(e_.kind() == (expected_kind));                             \
        }                                                                    \
        CHECK_MESSAGE(thrown_, "expected " << pcp::to_string(expected_kind)); \
    } while (0)

namespace testing {

inline pcp::Matrix random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, bool unit = true) {
    std::normal_distribution<double> g(0.0, 1.0);
    pcp::Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        double sq = 0.0;
        for (auto& x : v) {
            x = g(rng);
            sq += x * x;
        }
        const double s = unit ? 1.0 / std::sqrt(sq) : 1.0;
        for (std::size_t k = 0; k < d; ++k) m.row(i)[k] = static_cast<float>(v[k] * s);
    }
    return m;
}

inline std::vector<double> random_unit(std::size_t d, std::mt19937_64& rng) {
    auto m = random_rows(1, d, rng);
    return {m.data.begin(), m.data.end()};
}

inline pcp::Matrix rows_of(std::initializer_list<std::vector<float>> rows) {
    pcp::Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) m.row(i)[k] = r[k];
        ++i;
    }
    return m;
}

} // namespace testing
