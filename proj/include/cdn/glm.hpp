#pragma once

#include <span>
#include <vector>

#include "cdn/matrix.hpp"

namespace cdn {

enum class Family { gaussian, poisson };

struct GlmFit {
    std::vector<double> coefficients;
    Family family = Family::gaussian;
    bool converged = false;
    int iterations = 0;
    double final_nll = 0.0;
    // Set when the linear predictor hit the overflow clamp at any point.
    bool clamped = false;
};

struct PoissonFitOptions {
    int max_iter = 100;
    double tol = 1e-8;
    // Column initialized to ln(weighted mean of y); -1 for a zero start.
    int intercept_column = -1;
    // When set, receives the NLL after each accepted iteration.
    std::vector<double>* nll_trace = nullptr;
};

// Linear predictors are clamped at +50 before exponentiation; exp(50) ~ 5e21
// stays comfortably inside double range through the IRLS algebra.
inline constexpr double kLinearPredictorClamp = 50.0;

// sum_i w_i [exp(a_i gamma) - y_i a_i gamma + lgamma(y_i + 1)]
double poisson_nll(std::span<const double> gamma, const Matrix& a,
                   std::span<const double> y, std::span<const double> w,
                   bool* clamped = nullptr);

// sum_i w_i (exp(a_i gamma) - y_i) a_i
std::vector<double> poisson_nll_gradient(std::span<const double> gamma,
                                         const Matrix& a,
                                         std::span<const double> y,
                                         std::span<const double> w,
                                         bool* clamped = nullptr);

// Weighted IRLS with step-halving; always returns the best iterate.
GlmFit fit_poisson(const Matrix& a, std::span<const double> y,
                   std::span<const double> w, const PoissonFitOptions& opts = {});

// Weighted least squares; final_nll is the weighted residual sum of squares.
GlmFit fit_gaussian(const Matrix& a, std::span<const double> y,
                    std::span<const double> w);

}  // namespace cdn
