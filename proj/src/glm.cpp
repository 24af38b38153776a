#include "cdn/glm.hpp"

#include <algorithm>
#include <cmath>

#include "cdn/kernels.hpp"

namespace cdn {
namespace {

void validate_counts(std::span<const double> y) {
    for (double yi : y) {
        if (!(yi >= 0.0) || std::abs(yi - std::round(yi)) > 1e-9)
            throw std::invalid_argument("poisson: responses must be nonnegative integers");
    }
}

void validate_weights(std::span<const double> w) {
    for (double wi : w)
        if (!(wi >= 0.0)) throw std::invalid_argument("glm: weights must be >= 0");
}

double clamp_lp(double lp, bool* clamped) {
    if (lp > kLinearPredictorClamp) {
        if (clamped) *clamped = true;
        return kLinearPredictorClamp;
    }
    return lp;
}

}  // namespace

double poisson_nll(std::span<const double> gamma, const Matrix& a,
                   std::span<const double> y, std::span<const double> w,
                   bool* clamped) {
    const std::size_t n = a.rows();
    if (y.size() != n || w.size() != n)
        throw std::invalid_argument("poisson_nll: length mismatch");
    validate_counts(y);
    validate_weights(w);
    const auto& k = kernels::active();
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = clamp_lp(k.dot(a.row(i).data(), gamma.data(), a.cols()), clamped);
        nll += w[i] * (std::exp(lp) - y[i] * lp + std::lgamma(y[i] + 1.0));
    }
    return nll;
}

std::vector<double> poisson_nll_gradient(std::span<const double> gamma,
                                         const Matrix& a,
                                         std::span<const double> y,
                                         std::span<const double> w,
                                         bool* clamped) {
    const std::size_t n = a.rows(), p = a.cols();
    if (y.size() != n || w.size() != n)
        throw std::invalid_argument("poisson_nll_gradient: length mismatch");
    validate_counts(y);
    validate_weights(w);
    const auto& k = kernels::active();
    std::vector<double> grad(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = clamp_lp(k.dot(a.row(i).data(), gamma.data(), p), clamped);
        k.axpy(w[i] * (std::exp(lp) - y[i]), a.row(i).data(), grad.data(), p);
    }
    return grad;
}

GlmFit fit_poisson(const Matrix& a, std::span<const double> y,
                   std::span<const double> w, const PoissonFitOptions& opts) {
    const std::size_t n = a.rows(), p = a.cols();
    if (y.size() != n || w.size() != n)
        throw std::invalid_argument("fit_poisson: length mismatch");
    validate_counts(y);
    validate_weights(w);
    if (std::all_of(w.begin(), w.end(), [](double wi) { return wi == 0.0; }))
        throw std::invalid_argument("fit_poisson: all weights zero");

    GlmFit fit;
    fit.family = Family::poisson;
    fit.coefficients.assign(p, 0.0);
    if (opts.intercept_column >= 0) {
        double sw = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += w[i];
            sy += w[i] * y[i];
        }
        fit.coefficients[static_cast<std::size_t>(opts.intercept_column)] =
            std::log(sy / sw + 1e-8);
    }

    const auto& k = kernels::active();
    double nll = poisson_nll(fit.coefficients, a, y, w, &fit.clamped);
    if (opts.nll_trace) opts.nll_trace->push_back(nll);
    std::vector<double> lp(n), irls_w(n), z(n);

    for (int it = 0; it < opts.max_iter; ++it) {
        fit.iterations = it + 1;
        bool step_clamped = false;
        for (std::size_t i = 0; i < n; ++i) {
            double e = k.dot(a.row(i).data(), fit.coefficients.data(), p);
            e = clamp_lp(e, &step_clamped);
            lp[i] = e;
            const double mu = std::max(std::exp(e), 1e-10);
            irls_w[i] = w[i] * mu;
            z[i] = e + (y[i] - mu) / mu;
        }
        fit.clamped |= step_clamped;

        std::vector<double> proposal = solve_weighted_least_squares(a, z, irls_w);

        // Step-halving towards the current iterate until the NLL improves.
        double best_nll = nll;
        std::vector<double> best = fit.coefficients;
        double t = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
            std::vector<double> trial(p);
            for (std::size_t j = 0; j < p; ++j)
                trial[j] = fit.coefficients[j] + t * (proposal[j] - fit.coefficients[j]);
            const double trial_nll = poisson_nll(trial, a, y, w, &fit.clamped);
            if (trial_nll <= best_nll) {
                best_nll = trial_nll;
                best = std::move(trial);
                improved = true;
                break;
            }
        }
        if (!improved) break;  // no descent direction left; keep best iterate

        const double decrease = nll - best_nll;
        fit.coefficients = std::move(best);
        nll = best_nll;
        if (opts.nll_trace) opts.nll_trace->push_back(nll);

        const std::vector<double> grad =
            poisson_nll_gradient(fit.coefficients, a, y, w, &fit.clamped);
        double grad_inf = 0.0;
        for (double g : grad) grad_inf = std::max(grad_inf, std::abs(g));
        const double scale = std::max(1.0, std::abs(nll));
        if (decrease < opts.tol * scale || grad_inf < opts.tol * scale) {
            fit.converged = true;
            break;
        }
    }
    fit.final_nll = nll;
    return fit;
}

GlmFit fit_gaussian(const Matrix& a, std::span<const double> y,
                    std::span<const double> w) {
    GlmFit fit;
    fit.family = Family::gaussian;
    fit.coefficients = solve_weighted_least_squares(a, y, w);
    fit.converged = true;
    fit.iterations = 1;
    const auto& k = kernels::active();
    std::vector<double> resid = a.multiply(fit.coefficients);
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= y[i];
    fit.final_nll = k.weighted_sumsq(resid.data(), w.data(), resid.size());
    return fit;
}

}  // namespace cdn
