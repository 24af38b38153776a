#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cdn/matrix.hpp"

namespace cdn {

// Per-row leverage scores of a data matrix with the row-inclusion
// probabilities induced by a size parameter k.
struct LeverageProfile {
    std::vector<double> scores;         // l_i, sum to 1
    std::size_t rank = 0;               // rho
    double size_param = 0.0;            // k
    std::vector<double> probabilities;  // q_i = min(1, k * l_i)
};

// Outcome of a Bernoulli per-row draw: strictly increasing distinct indices
// with inverse-probability weights.
struct SamplingOperator {
    struct Entry {
        std::size_t index;
        double weight;  // 1 / q_i, always >= 1
    };
    std::vector<Entry> selected;
    std::size_t origin_rows = 0;
    std::uint64_t seed = 0;
};

class EmptyDrawError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// l_i = ||U_{i*}||^2 / rho; sums to 1.
std::vector<double> leverage_scores(const ThinSVD& svd);

// q_i = min(1, k * l_i)
std::vector<double> sampling_probabilities(std::span<const double> scores, double k);

// k = ceil(D * rho * ln(rho / eps) / eps^2); requires 0 < eps < 1/2.
std::size_t recommended_size(std::size_t rank, double eps, double const_d = 1.0);

// Smallest k whose expected sample size sum_i min(1, k l_i) reaches target m
// (bisection; the map is continuous and non-decreasing in k).
double size_param_for_expected(std::span<const double> scores, double target);

LeverageProfile make_leverage_profile(const ThinSVD& svd, double size_param);

// Independent Bernoulli(q_i) per row; throws EmptyDrawError when nothing is
// selected so the caller can redraw.
SamplingOperator draw_sampling_operator(std::span<const double> probabilities,
                                        std::uint64_t seed);

// ||U^T S^T S U - I||_2: the smallest eps for which the subspace-embedding
// sandwich holds over all gamma.
double embedding_distortion(const Matrix& x, const SamplingOperator& s);
double embedding_distortion(const ThinSVD& svd, const SamplingOperator& s);

}  // namespace cdn
