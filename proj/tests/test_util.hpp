#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "srcl/core.hpp"
#include "srcl/error.hpp"

namespace srcl::test {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) out(i, j) = n(rng);
    return out;
}

inline Vector random_vector(Index size, std::mt19937_64& rng, double scale = 1.0) {
    return random_matrix(size, 1, rng, scale).col(0);
}

inline Vector uniform_vector(Index size, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector out(size);
    for (Index i = 0; i < size; ++i) out[i] = u(rng);
    return out;
}

inline Matrix uniform_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo, double hi) {
    return uniform_vector(rows * cols, rng, lo, hi).reshaped(rows, cols);
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

// Relative difference with an absolute floor of 1.
inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace srcl::test

// Checks that `expr` throws srcl::Error carrying `ecode`.
#define CHECK_THROWS_CODE(expr, ecode)                         \
    do {                                                       \
        bool thrown_ = false;                                  \
        try {                                                  \
            (void)(expr);                                      \
        } catch (const srcl::Error& e_) {                      \
            thrown_ = true;                                    \
            CHECK_MESSAGE(e_.code() == (ecode), e_.what());    \
        }                                                      \
        CHECK_MESSAGE(thrown_, #expr " did not throw");        \
    } while (0)
