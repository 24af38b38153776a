#pragma once

#include <cstddef>
#include <string_view>

// Dense arithmetic kernels underlying the SVD, leverage-score and GLM loops.
// A scalar reference implementation always exists; wider variants (AVX2 on
// x86-64, NEON on aarch64) are selected once at startup from CPU features.
// All variants must agree with the scalar reference to floating-point
// reassociation error; tests/test_kernels.cpp enforces this.

namespace cdn::kernels {

struct Ops {
    // sum x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum x[i]^2
    double (*sumsq)(const double* x, std::size_t n);
    // sum w[i] * x[i]^2
    double (*weighted_sumsq)(const double* x, const double* w, std::size_t n);
    // sum w[i] * x[i] * y[i]
    double (*weighted_dot)(const double* x, const double* y, const double* w,
                           std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
};

const Ops& scalar();

// Best variant for the running CPU (scalar if nothing wider is available).
const Ops& active();
std::string_view active_name();

// Override the active variant by name ("scalar", "avx2", "neon").
// Returns false if the variant is not compiled in or not supported.
bool select(std::string_view name);

}  // namespace cdn::kernels
