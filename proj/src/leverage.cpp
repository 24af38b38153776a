#include "cdn/leverage.hpp"

#include <cmath>
#include <random>

#include "cdn/kernels.hpp"

namespace cdn {

std::vector<double> leverage_scores(const ThinSVD& svd) {
    if (svd.rank == 0) throw std::invalid_argument("leverage_scores: zero-rank SVD");
    const auto& k = kernels::active();
    const std::size_t n = svd.u.rows();
    const double inv_rank = 1.0 / static_cast<double>(svd.rank);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i)
        scores[i] = k.sumsq(svd.u.row(i).data(), svd.rank) * inv_rank;
    return scores;
}

std::vector<double> sampling_probabilities(std::span<const double> scores, double k) {
    if (k < 1.0) throw std::invalid_argument("sampling_probabilities: k must be >= 1");
    std::vector<double> q(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        q[i] = std::min(1.0, k * scores[i]);
    return q;
}

std::size_t recommended_size(std::size_t rank, double eps, double const_d) {
    if (rank < 1) throw std::invalid_argument("recommended_size: rank must be >= 1");
    if (!(eps > 0.0 && eps < 0.5))
        throw std::invalid_argument("recommended_size: eps must lie in (0, 1/2)");
    if (const_d <= 0.0)
        throw std::invalid_argument("recommended_size: const_d must be > 0");
    const double rho = static_cast<double>(rank);
    return static_cast<std::size_t>(
        std::ceil(const_d * rho * std::log(rho / eps) / (eps * eps)));
}

double size_param_for_expected(std::span<const double> scores, double target) {
    const auto expected = [&](double k) {
        double s = 0.0;
        for (double l : scores) s += std::min(1.0, k * l);
        return s;
    };
    const double n = static_cast<double>(scores.size());
    if (target <= 0.0 || target > n)
        throw std::invalid_argument("size_param_for_expected: target out of range");
    double lo = 0.0, hi = 1.0;
    while (expected(hi) < target && hi < 1e18) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected(mid) < target ? lo : hi) = mid;
    }
    // Nudge upward so a saturating target (m = n) yields q_i exactly 1.
    return hi * (1.0 + 1e-9);
}

LeverageProfile make_leverage_profile(const ThinSVD& svd, double size_param) {
    LeverageProfile p;
    p.scores = leverage_scores(svd);
    p.rank = svd.rank;
    p.size_param = size_param;
    p.probabilities = sampling_probabilities(p.scores, size_param);
    return p;
}

SamplingOperator draw_sampling_operator(std::span<const double> probabilities,
                                        std::uint64_t seed) {
    SamplingOperator op;
    op.origin_rows = probabilities.size();
    op.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double q = probabilities[i];
        if (q < 0.0 || q > 1.0)
            throw std::invalid_argument("draw_sampling_operator: probability out of [0,1]");
        const double u = unit(rng);  // one draw per row keeps seeds comparable
        if (q > 0.0 && u < q) op.selected.push_back({i, 1.0 / q});
    }
    if (op.selected.empty())
        throw EmptyDrawError("draw_sampling_operator: empty draw, redraw with a new seed");
    return op;
}

double embedding_distortion(const ThinSVD& svd, const SamplingOperator& s) {
    const std::size_t rho = svd.rank;
    // M = sum_{i in S} w_i u_i u_i^T - I
    Matrix m(rho, rho);
    for (const auto& e : s.selected) {
        const auto ui = svd.u.row(e.index);
        for (std::size_t a = 0; a < rho; ++a)
            for (std::size_t b = 0; b < rho; ++b)
                m(a, b) += e.weight * ui[a] * ui[b];
    }
    for (std::size_t a = 0; a < rho; ++a) m(a, a) -= 1.0;
    return spectral_norm(m);
}

double embedding_distortion(const Matrix& x, const SamplingOperator& s) {
    if (s.origin_rows != x.rows())
        throw std::invalid_argument("embedding_distortion: operator drawn for different n");
    return embedding_distortion(thin_svd(x), s);
}

}  // namespace cdn
