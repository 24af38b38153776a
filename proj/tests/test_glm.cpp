#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cdn/glm.hpp"
#include "test_util.hpp"

using namespace cdn;

namespace {

struct RandomPoissonInstance {
    Matrix a;
    std::vector<double> y;
    std::vector<double> w;
    std::vector<double> gamma;
};

RandomPoissonInstance random_instance(std::size_t n, std::size_t p,
                                      std::uint64_t seed) {
    RandomPoissonInstance inst;
    inst.a = testutil::gaussian_matrix(n, p, seed, 0.5);
    inst.gamma = testutil::gaussian_vector(p, seed + 1, 0.4);
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> wd(0.5, 2.0);
    inst.w.resize(n);
    for (double& wi : inst.w) wi = wd(rng);
    inst.y.resize(n);
    const auto lp = inst.a.multiply(inst.gamma);
    for (std::size_t i = 0; i < n; ++i) {
        std::poisson_distribution<long long> draw(std::exp(lp[i]));
        inst.y[i] = static_cast<double>(draw(rng));
    }
    return inst;
}

}  // namespace

TEST_CASE("poisson nll at zero coefficients with unit counts") {
    const std::size_t n = 7;
    Matrix a(n, 2, std::vector<double>(n * 2, 1.0));
    const std::vector<double> y(n, 1.0), w(n, 1.0), gamma(2, 0.0);
    // exp(0) - 1*0 + ln(1!) = 1 per row
    CHECK(poisson_nll(gamma, a, y, w) == doctest::Approx(static_cast<double>(n)));
}

TEST_CASE("poisson nll single-row identity case") {
    const Matrix a(1, 1, std::vector<double>{1.0});
    CHECK(poisson_nll(std::vector<double>{0.0}, a, std::vector<double>{0.0},
                      std::vector<double>{1.0}) == doctest::Approx(1.0));
}

TEST_CASE("poisson nll matches a long-double term-by-term oracle") {
    const auto inst = random_instance(30, 4, 99);
    long double oracle = 0.0L;
    for (std::size_t i = 0; i < 30; ++i) {
        long double lp = 0.0L;
        for (std::size_t j = 0; j < 4; ++j)
            lp += static_cast<long double>(inst.a(i, j)) * inst.gamma[j];
        oracle += inst.w[i] * (std::exp(lp) - inst.y[i] * lp +
                               std::lgamma(static_cast<long double>(inst.y[i]) + 1.0L));
    }
    CHECK(poisson_nll(inst.gamma, inst.a, inst.y, inst.w) ==
          doctest::Approx(static_cast<double>(oracle)).epsilon(1e-10));
}

TEST_CASE("poisson nll validates counts and weights") {
    const Matrix a(2, 1, std::vector<double>{1.0, 1.0});
    const std::vector<double> gamma{0.0}, w{1.0, 1.0};
    CHECK_THROWS((void)poisson_nll(gamma, a, std::vector<double>{-1.0, 0.0}, w));
    CHECK_THROWS((void)poisson_nll(gamma, a, std::vector<double>{1.5, 0.0}, w));
    CHECK_THROWS((void)poisson_nll(gamma, a, std::vector<double>{1.0, 1.0},
                                   std::vector<double>{-1.0, 1.0}));
}

TEST_CASE("poisson nll flags a clamped linear predictor") {
    const Matrix a(1, 1, std::vector<double>{100.0});
    bool clamped = false;
    (void)poisson_nll(std::vector<double>{1.0}, a, std::vector<double>{1.0},
                      std::vector<double>{1.0}, &clamped);
    CHECK(clamped);
}

TEST_CASE("gradient vanishes at the intercept-only MLE") {
    Matrix a(3, 1, std::vector<double>{1.0, 1.0, 1.0});
    const std::vector<double> y{1.0, 2.0, 3.0}, w{1.0, 1.0, 1.0};
    const std::vector<double> gamma{std::log(2.0)};
    const auto g = poisson_nll_gradient(gamma, a, y, w);
    CHECK(std::abs(g[0]) < 1e-6);
}

TEST_CASE("gradient is zero when counts equal their means exactly") {
    const Matrix a(2, 1, std::vector<double>{0.0, std::log(2.0)});
    const std::vector<double> gamma{1.0};
    const std::vector<double> y{1.0, 2.0}, w{1.0, 1.0};
    const auto g = poisson_nll_gradient(gamma, a, y, w);
    CHECK(std::abs(g[0]) < 1e-12);
}

TEST_CASE("gradient matches central finite differences") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto inst = random_instance(10 + seed % 41, 1 + seed % 5, 500 + seed);
        const auto g = poisson_nll_gradient(inst.gamma, inst.a, inst.y, inst.w);
        const double h = 1e-6;
        for (std::size_t j = 0; j < inst.gamma.size(); ++j) {
            auto gp = inst.gamma, gm = inst.gamma;
            gp[j] += h;
            gm[j] -= h;
            const double fd = (poisson_nll(gp, inst.a, inst.y, inst.w) -
                               poisson_nll(gm, inst.a, inst.y, inst.w)) /
                              (2.0 * h);
            CHECK(std::abs(fd - g[j]) <= 1e-4 * std::max(1.0, std::abs(g[j])));
        }
    }
}

TEST_CASE("intercept-only poisson fit recovers the log of the sample mean") {
    Matrix a(3, 1, std::vector<double>{1.0, 1.0, 1.0});
    PoissonFitOptions opts;
    opts.intercept_column = 0;
    const auto fit = fit_poisson(a, std::vector<double>{1.0, 2.0, 3.0},
                                 std::vector<double>{1.0, 1.0, 1.0}, opts);
    CHECK(fit.converged);
    CHECK(std::exp(fit.coefficients[0]) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("intercept-only fit on counts averaging 1.59") {
    // 100 games totalling 159 goals
    const std::size_t n = 100;
    Matrix a(n, 1, std::vector<double>(n, 1.0));
    std::vector<double> y(n, 1.0);
    for (std::size_t i = 0; i < 59; ++i) y[i] = 2.0;
    const std::vector<double> w(n, 1.0);
    PoissonFitOptions opts;
    opts.intercept_column = 0;
    const auto fit = fit_poisson(a, y, w, opts);
    CHECK(std::exp(fit.coefficients[0]) == doctest::Approx(1.59).epsilon(1e-8));
}

TEST_CASE("poisson fit is consistent on model data") {
    // n = 1e5 draws from the true model; recovered coefficients within
    // 3 asymptotic standard errors from the inverse Fisher information.
    const std::size_t n = 100000;
    Matrix a(n, 2);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, 0) = dist(rng);
        a(i, 1) = 1.0;
    }
    const std::vector<double> truth{0.4, 0.2};
    std::vector<double> y(n), w(n, 1.0);
    const auto lp = a.multiply(truth);
    for (std::size_t i = 0; i < n; ++i) {
        std::poisson_distribution<long long> draw(std::exp(lp[i]));
        y[i] = static_cast<double>(draw(rng));
    }
    PoissonFitOptions opts;
    opts.intercept_column = 1;
    const auto fit = fit_poisson(a, y, w, opts);
    REQUIRE(fit.converged);
    // Fisher information: sum mu_i x_i x_i^T at the fitted parameters
    Matrix info(2, 2);
    const auto flp = a.multiply(fit.coefficients);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = std::exp(flp[i]);
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t q = 0; q < 2; ++q) info(p, q) += mu * a(i, p) * a(i, q);
    }
    const Matrix cov = testutil::invert(info);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(fit.coefficients[j] - truth[j]) <= 3.0 * std::sqrt(cov(j, j)));
}

TEST_CASE("IRLS NLL is non-increasing across accepted iterations") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto inst = random_instance(60, 3, 900 + seed);
        std::vector<double> trace;
        PoissonFitOptions opts;
        opts.nll_trace = &trace;
        (void)fit_poisson(inst.a, inst.y, inst.w, opts);
        REQUIRE(trace.size() >= 2);
        for (std::size_t i = 0; i + 1 < trace.size(); ++i)
            CHECK(trace[i + 1] <= trace[i] + 1e-12);
    }
}

TEST_CASE("poisson weight equivalence: integer weight equals row repetition") {
    auto inst = random_instance(20, 2, 321);
    std::vector<double> w_int(20, 1.0);
    w_int[3] = 3.0;
    w_int[11] = 2.0;
    // expanded instance
    std::vector<double> rows;
    std::vector<double> y_rep;
    for (std::size_t i = 0; i < 20; ++i) {
        const int reps = static_cast<int>(w_int[i]);
        for (int r = 0; r < reps; ++r) {
            rows.push_back(inst.a(i, 0));
            rows.push_back(inst.a(i, 1));
            y_rep.push_back(inst.y[i]);
        }
    }
    Matrix a_rep(y_rep.size(), 2, rows);
    const std::vector<double> w_rep(y_rep.size(), 1.0);
    const auto f1 = fit_poisson(inst.a, inst.y, w_int);
    const auto f2 = fit_poisson(a_rep, y_rep, w_rep);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(f1.coefficients[j] == doctest::Approx(f2.coefficients[j]).epsilon(1e-9));
}

TEST_CASE("separation-like data returns a flagged unconverged fit") {
    // y grows with x so steeply that the predictor is driven into the clamp
    Matrix a(4, 1, std::vector<double>{10.0, 20.0, 30.0, 40.0});
    const std::vector<double> y{0.0, 0.0, 0.0, 100000.0}, w(4, 1.0);
    PoissonFitOptions opts;
    opts.max_iter = 50;
    const auto fit = fit_poisson(a, y, w, opts);
    CHECK(fit.coefficients.size() == 1);
    CHECK(std::isfinite(fit.coefficients[0]));
    CHECK(fit.clamped);
}

TEST_CASE("gaussian fit recovers exact linear data") {
    const Matrix a = testutil::gaussian_matrix(12, 3, 55);
    const std::vector<double> truth{1.0, -2.0, 0.5};
    const auto y = a.multiply(truth);
    const auto fit = fit_gaussian(a, y, std::vector<double>(12, 1.0));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(fit.coefficients[j] == doctest::Approx(truth[j]).epsilon(1e-9));
    CHECK(fit.final_nll == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gaussian weighted two-point example") {
    const Matrix a(2, 1, std::vector<double>{1.0, 1.0});
    const auto fit = fit_gaussian(a, std::vector<double>{2.0, 4.0},
                                  std::vector<double>{3.0, 1.0});
    CHECK(fit.coefficients[0] == doctest::Approx(2.5));
}

TEST_CASE("gaussian half-weight duplicated rows equal the original fit") {
    const Matrix a = testutil::gaussian_matrix(10, 2, 77);
    const auto y = testutil::gaussian_vector(10, 78);
    std::vector<double> rows;
    std::vector<double> y2;
    for (std::size_t i = 0; i < 10; ++i)
        for (int r = 0; r < 2; ++r) {
            rows.push_back(a(i, 0));
            rows.push_back(a(i, 1));
            y2.push_back(y[i]);
        }
    const Matrix a2(20, 2, rows);
    const auto f1 = fit_gaussian(a, y, std::vector<double>(10, 1.0));
    const auto f2 = fit_gaussian(a2, y2, std::vector<double>(20, 0.5));
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(f1.coefficients[j] == doctest::Approx(f2.coefficients[j]).epsilon(1e-9));
}
