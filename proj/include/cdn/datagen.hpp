#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdn/matrix.hpp"

namespace cdn {

// Acyclic planted linear model: planted[i] holds the coefficients of
// x_0..x_{i-1} in the equation for x_i (length i).
using PlantedLinearModel = std::vector<std::vector<double>>;

PlantedLinearModel random_planted_model(std::size_t d, std::uint64_t seed,
                                        double scale = 1.0);

// Ancestral sampling: x_i = sum_j planted[i][j] x_j + N(0, sigma^2).
Matrix generate_gaussian_dn_data(std::size_t d, std::size_t n,
                                 const PlantedLinearModel& planted, double sigma,
                                 std::uint64_t seed);

// Scales `count` randomly chosen rows by `magnitude`, concentrating leverage
// on them. Returns the affected row indices.
std::vector<std::size_t> inject_high_leverage_rows(Matrix& x, std::size_t count,
                                                   double magnitude,
                                                   std::uint64_t seed);

// y_i ~ Poisson(exp(x_i gamma + v_i)), v_i ~ N(-sigma^2/2, sigma^2), so that
// E[y_i | x_i] = exp(x_i gamma). sigma = 0 is the plain Poisson model.
std::vector<double> generate_lognormal_poisson(const Matrix& x,
                                               std::span<const double> gamma,
                                               double sigma, std::uint64_t seed);

// Points on a scaled regular n-gon whose query hyperplanes isolate single
// vertices, forcing exponential likelihood separation.
struct HardInstance {
    Matrix x;                          // present points, rows (r w^i, -1)
    std::vector<double> y;             // all ones
    std::vector<int> bits;             // length n
    std::vector<std::size_t> present;  // indices i with bits[i] = 1
    double radius = 0.0;               // r = n / (1 - cos(2 pi / n))
    Matrix queries;                    // n x 3, row j = (w^j, r cos(2 pi / n))
};

HardInstance generate_hard_instance(std::size_t n, std::span<const int> bits);

inline constexpr std::size_t kKeepAll = static_cast<std::size_t>(-1);

// ln of the Poisson regression NLL at query j over the present points,
// evaluated in log domain so exp(n)-scale costs stay representable.
// drop_present skips one entry of `present` (by position in that list).
double hard_instance_log_nll(const HardInstance& inst, std::size_t query,
                             std::size_t drop_present = kKeepAll);

// d^m x d orthonormal matrix: I_d / sqrt(d^(m-1)) stacked d^(m-1) times.
// All leverage scores equal 1/d^m.
Matrix generate_stacked_identity(std::size_t d, std::size_t m);

}  // namespace cdn
