#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cdn/coreset.hpp"
#include "cdn/glm.hpp"
#include "cdn/matrix.hpp"

namespace cdn {

// One conditional GLM per variable over all remaining variables; directed and
// possibly cyclic. coefficients[i] holds the regression of column i on the
// other columns in increasing column order, intercept last when enabled.
struct DependencyNetwork {
    Family family = Family::gaussian;
    std::size_t d = 0;
    bool intercept = true;
    std::vector<std::vector<double>> coefficients;
    std::vector<std::string> variable_names;  // optional, empty if unnamed

    // Conditional mean of variable i given the other entries of row.
    double conditional_mean(std::size_t i, std::span<const double> row) const;
    // Linear predictor only (no inverse link).
    double linear_predictor(std::size_t i, std::span<const double> row) const;
};

struct TrainOptions {
    bool intercept = true;
    std::size_t workers = 1;
    PoissonFitOptions poisson;
};

// Design matrix for variable i: all other columns (+ trailing intercept).
Matrix design_for_variable(const Matrix& x, std::size_t i, bool intercept);

DependencyNetwork train(const Matrix& x, Family family,
                        const TrainOptions& opts = {});
DependencyNetwork train(const Matrix& x, std::span<const double> weights,
                        Family family, const TrainOptions& opts = {});
DependencyNetwork train(const WeightedCoreset& c, Family family,
                        const TrainOptions& opts = {});

// sum_i || X^{\i} gamma^(i) - X^(i) ||^2, weighted when weights are given.
// Gaussian family only.
double gdn_loss(const DependencyNetwork& dn, const Matrix& x,
                std::span<const double> weights = {});

double neg_log_pseudo_likelihood(const DependencyNetwork& dn, const Matrix& x,
                                 std::span<const double> weights = {});

// Entry (j, i) = conditional mean of variable i given row j's other entries.
Matrix predict(const DependencyNetwork& dn, const Matrix& x);

// Per-variable residual variance estimate, for reporting only.
std::vector<double> residual_variances(const DependencyNetwork& dn, const Matrix& x);

struct GibbsState {
    std::vector<double> current;
    std::size_t step = 0;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
};

GibbsState make_gibbs_state(std::vector<double> start, std::uint64_t seed);

// One full sweep, resampling variables in index order.
void gibbs_step(const DependencyNetwork& dn, GibbsState& state);

// JSON (de)serialization; coefficient round-trip is bit-exact.
std::string to_json(const DependencyNetwork& dn);
DependencyNetwork depnet_from_json(const std::string& text);
void save_depnet(const DependencyNetwork& dn, const std::string& path);
DependencyNetwork load_depnet(const std::string& path);

}  // namespace cdn
