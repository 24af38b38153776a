#include "cdn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace cdn {

PlantedLinearModel random_planted_model(std::size_t d, std::uint64_t seed,
                                        double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-scale, scale);
    PlantedLinearModel m(d);
    for (std::size_t i = 0; i < d; ++i) {
        m[i].resize(i);
        for (std::size_t j = 0; j < i; ++j) m[i][j] = coef(rng);
    }
    return m;
}

Matrix generate_gaussian_dn_data(std::size_t d, std::size_t n,
                                 const PlantedLinearModel& planted, double sigma,
                                 std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("generate_gaussian_dn_data: d must be >= 2");
    if (planted.size() != d)
        throw std::invalid_argument("generate_gaussian_dn_data: planted size != d");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix x(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            double v = sigma * noise(rng);
            for (std::size_t j = 0; j < i; ++j) v += planted[i][j] * x(r, j);
            x(r, i) = v;
        }
    }
    return x;
}

std::vector<std::size_t> inject_high_leverage_rows(Matrix& x, std::size_t count,
                                                   double magnitude,
                                                   std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (count > n)
        throw std::invalid_argument("inject_high_leverage_rows: count > rows");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    for (std::size_t r : idx)
        for (std::size_t j = 0; j < x.cols(); ++j) x(r, j) *= magnitude;
    return idx;
}

std::vector<double> generate_lognormal_poisson(const Matrix& x,
                                               std::span<const double> gamma,
                                               double sigma, std::uint64_t seed) {
    if (sigma < 0.0)
        throw std::invalid_argument("generate_lognormal_poisson: sigma must be >= 0");
    const std::vector<double> lp = x.multiply(gamma);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double mu = -0.5 * sigma * sigma;  // keeps E[y|x] = exp(x gamma)
    std::vector<double> y(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double v = sigma > 0.0 ? mu + sigma * noise(rng) : 0.0;
        const double rate = std::exp(lp[i] + v);
        if (!std::isfinite(rate))
            throw std::runtime_error("generate_lognormal_poisson: rate overflow");
        std::poisson_distribution<long long> draw(rate);
        y[i] = static_cast<double>(draw(rng));
    }
    return y;
}

HardInstance generate_hard_instance(std::size_t n, std::span<const int> bits) {
    if (n < 3)
        throw std::invalid_argument("generate_hard_instance: polygon needs n >= 3");
    if (bits.size() != n)
        throw std::invalid_argument("generate_hard_instance: bits length != n");

    HardInstance inst;
    const double nd = static_cast<double>(n);
    const double step = 2.0 * std::numbers::pi / nd;
    inst.radius = nd / (1.0 - std::cos(step));
    inst.bits.assign(bits.begin(), bits.end());

    for (std::size_t i = 0; i < n; ++i)
        if (bits[i] != 0) inst.present.push_back(i);

    inst.x = Matrix(inst.present.size(), 3);
    for (std::size_t r = 0; r < inst.present.size(); ++r) {
        const double theta = step * static_cast<double>(inst.present[r]);
        inst.x(r, 0) = inst.radius * std::cos(theta);
        inst.x(r, 1) = inst.radius * std::sin(theta);
        inst.x(r, 2) = -1.0;
    }
    inst.y.assign(inst.present.size(), 1.0);

    inst.queries = Matrix(n, 3);
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = step * static_cast<double>(j);
        inst.queries(j, 0) = std::cos(theta);
        inst.queries(j, 1) = std::sin(theta);
        inst.queries(j, 2) = inst.radius * std::cos(step);
    }
    return inst;
}

namespace {

// ln(exp(t) - t); the term is positive for every real t.
double log_term(double t) {
    if (t >= 30.0) return t + std::log1p(-t * std::exp(-t));
    return std::log(std::exp(t) - t);
}

}  // namespace

double hard_instance_log_nll(const HardInstance& inst, std::size_t query,
                             std::size_t drop_present) {
    if (query >= inst.queries.rows())
        throw std::invalid_argument("hard_instance_log_nll: query out of range");
    const auto g = inst.queries.row(query);
    std::vector<double> logs;
    logs.reserve(inst.present.size());
    for (std::size_t r = 0; r < inst.present.size(); ++r) {
        if (r == drop_present) continue;
        const auto xi = inst.x.row(r);
        const double t = xi[0] * g[0] + xi[1] * g[1] + xi[2] * g[2];
        logs.push_back(log_term(t));
    }
    if (logs.empty())
        throw std::invalid_argument("hard_instance_log_nll: no points left");
    const double m = *std::max_element(logs.begin(), logs.end());
    double s = 0.0;
    for (double l : logs) s += std::exp(l - m);
    return m + std::log(s);
}

Matrix generate_stacked_identity(std::size_t d, std::size_t m) {
    if (d < 2) throw std::invalid_argument("generate_stacked_identity: d must be >= 2");
    if (m < 1) throw std::invalid_argument("generate_stacked_identity: m must be >= 1");
    double size = 1.0;
    for (std::size_t i = 0; i < m; ++i) size *= static_cast<double>(d);
    if (size > 4e6)
        throw std::invalid_argument("generate_stacked_identity: d^m too large");
    const std::size_t copies = static_cast<std::size_t>(size) / d;
    const double scale = 1.0 / std::sqrt(static_cast<double>(copies));
    Matrix x(static_cast<std::size_t>(size), d);
    for (std::size_t c = 0; c < copies; ++c)
        for (std::size_t j = 0; j < d; ++j) x(c * d + j, j) = scale;
    return x;
}

}  // namespace cdn
