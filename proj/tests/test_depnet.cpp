#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "cdn/datagen.hpp"
#include "cdn/depnet.hpp"
#include "cdn/leverage.hpp"
#include "test_util.hpp"

using namespace cdn;

namespace {

DependencyNetwork make_gaussian_dn(std::size_t d, bool intercept,
                                   std::vector<std::vector<double>> coefs) {
    DependencyNetwork dn;
    dn.family = Family::gaussian;
    dn.d = d;
    dn.intercept = intercept;
    dn.coefficients = std::move(coefs);
    return dn;
}

}  // namespace

TEST_CASE("design matrix drops the target column and appends the intercept") {
    Matrix x(2, 3);
    x(0, 0) = 1; x(0, 1) = 2; x(0, 2) = 3;
    x(1, 0) = 4; x(1, 1) = 5; x(1, 2) = 6;
    const Matrix a = design_for_variable(x, 1, true);
    REQUIRE(a.rows() == 2);
    REQUIRE(a.cols() == 3);
    CHECK(a(0, 0) == 1); CHECK(a(0, 1) == 3); CHECK(a(0, 2) == 1.0);
    CHECK(a(1, 0) == 4); CHECK(a(1, 1) == 6); CHECK(a(1, 2) == 1.0);
    const Matrix b = design_for_variable(x, 0, false);
    REQUIRE(b.cols() == 2);
    CHECK(b(0, 0) == 2); CHECK(b(0, 1) == 3);
}

TEST_CASE("noise-free linear relation is recovered exactly") {
    Matrix x(50, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < 50; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = 2.0 * x(i, 0);
    }
    TrainOptions opts;
    opts.intercept = false;
    const auto dn = train(x, Family::gaussian, opts);
    CHECK(dn.coefficients[1][0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(dn.coefficients[0][0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(gdn_loss(dn, x) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("gdn loss at zero coefficients equals the squared frobenius norm") {
    const Matrix x = testutil::gaussian_matrix(30, 4, 5);
    auto dn = make_gaussian_dn(4, false,
                               {std::vector<double>(3, 0.0), std::vector<double>(3, 0.0),
                                std::vector<double>(3, 0.0), std::vector<double>(3, 0.0)});
    const double fro = frobenius_norm(x);
    CHECK(gdn_loss(dn, x) == doctest::Approx(fro * fro).epsilon(1e-12));
}

TEST_CASE("training on a saturated coreset reproduces the full model") {
    const Matrix x = testutil::gaussian_matrix(80, 3, 7);
    const ThinSVD svd = thin_svd(x);
    const auto scores = leverage_scores(svd);
    const double k = size_param_for_expected(scores, 80.0);
    const auto op = draw_sampling_operator(sampling_probabilities(scores, k), 1);
    const auto c = coreset_from_operator(x, op);
    REQUIRE(c.size() == 80);
    const auto full = train(x, Family::gaussian);
    const auto sub = train(c, Family::gaussian);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < full.coefficients[i].size(); ++j)
            CHECK(sub.coefficients[i][j] ==
                  doctest::Approx(full.coefficients[i][j]).epsilon(1e-9));
}

TEST_CASE("gaussian training satisfies the per-variable normal equations") {
    const Matrix x = testutil::gaussian_matrix(60, 4, 11);
    const auto dn = train(x, Family::gaussian);
    for (std::size_t i = 0; i < 4; ++i) {
        const Matrix a = design_for_variable(x, i, true);
        std::vector<double> resid = a.multiply(dn.coefficients[i]);
        for (std::size_t r = 0; r < 60; ++r) resid[r] -= x(r, i);
        // A^T resid = 0 at the least squares solution
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < 60; ++r) dot += a(r, j) * resid[r];
            CHECK(std::abs(dot) < 1e-7);
        }
    }
}

TEST_CASE("parallel training matches single-threaded training") {
    const Matrix x = testutil::gaussian_matrix(50, 6, 13);
    TrainOptions serial, parallel;
    parallel.workers = 3;
    const auto a = train(x, Family::gaussian, serial);
    const auto b = train(x, Family::gaussian, parallel);
    REQUIRE(a.coefficients.size() == b.coefficients.size());
    for (std::size_t i = 0; i < 6; ++i) CHECK(a.coefficients[i] == b.coefficients[i]);
}

TEST_CASE("gaussian pseudo-likelihood decomposes into loss plus constant") {
    const Matrix x = testutil::gaussian_matrix(25, 3, 17);
    const auto dn = train(x, Family::gaussian);
    const double nlpl = neg_log_pseudo_likelihood(dn, x);
    const double expect =
        0.5 * gdn_loss(dn, x) + 0.5 * std::log(2.0 * std::numbers::pi) * 25.0 * 3.0;
    CHECK(nlpl == doctest::Approx(expect).epsilon(1e-12));

    std::vector<double> w(25, 2.0);
    const double weighted = neg_log_pseudo_likelihood(dn, x, w);
    const double wexpect =
        0.5 * gdn_loss(dn, x, w) + 0.5 * std::log(2.0 * std::numbers::pi) * 50.0 * 3.0;
    CHECK(weighted == doctest::Approx(wexpect).epsilon(1e-12));
}

TEST_CASE("poisson pseudo-likelihood at zero coefficients on zero counts") {
    const std::size_t n = 7, d = 3;
    Matrix x(n, d);  // all-zero counts
    DependencyNetwork dn;
    dn.family = Family::poisson;
    dn.d = d;
    dn.intercept = false;
    dn.coefficients.assign(d, std::vector<double>(d - 1, 0.0));
    // each term is exp(0) - 0 + lgamma(1) = 1
    CHECK(neg_log_pseudo_likelihood(dn, x) ==
          doctest::Approx(static_cast<double>(n * d)).epsilon(1e-12));
}

TEST_CASE("poisson pseudo-likelihood matches a long-double oracle") {
    std::mt19937_64 rng(19);
    std::poisson_distribution<int> pois(2.0);
    Matrix x(40, 3);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = pois(rng);
    const auto dn = train(x, Family::poisson);
    long double oracle = 0.0L;
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t v = 0; v < 3; ++v) {
            long double lp = dn.coefficients[v].back();  // intercept last
            std::size_t pos = 0;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != v) lp += static_cast<long double>(dn.coefficients[v][pos++]) * x(i, j);
            oracle += expl(lp) - x(i, v) * lp + lgammal(x(i, v) + 1.0L);
        }
    }
    CHECK(neg_log_pseudo_likelihood(dn, x) ==
          doctest::Approx(static_cast<double>(oracle)).epsilon(1e-10));
}

TEST_CASE("predict returns conditional means") {
    auto dn = make_gaussian_dn(2, true, {{2.0, 1.0}, {3.0, -1.0}});
    Matrix x(1, 2);
    x(0, 0) = 4.0;
    x(0, 1) = 5.0;
    const Matrix p = predict(dn, x);
    CHECK(p(0, 0) == doctest::Approx(2.0 * 5.0 + 1.0));
    CHECK(p(0, 1) == doctest::Approx(3.0 * 4.0 - 1.0));

    DependencyNetwork pois;
    pois.family = Family::poisson;
    pois.d = 2;
    pois.intercept = false;
    pois.coefficients = {{0.5}, {0.0}};
    Matrix c(1, 2);
    c(0, 0) = 1.0;
    c(0, 1) = 2.0;
    const Matrix q = predict(pois, c);
    CHECK(q(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(q(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("residual variances match a direct computation") {
    const Matrix x = testutil::gaussian_matrix(35, 3, 23);
    const auto dn = train(x, Family::gaussian);
    const auto vars = residual_variances(dn, x);
    const Matrix mu = predict(dn, x);
    REQUIRE(vars.size() == 3);
    for (std::size_t v = 0; v < 3; ++v) {
        double ss = 0.0;
        for (std::size_t i = 0; i < 35; ++i) {
            const double r = x(i, v) - mu(i, v);
            ss += r * r;
        }
        CHECK(vars[v] == doctest::Approx(ss / 35.0).epsilon(1e-9));
    }
}

TEST_CASE("poisson training is consistent on model-generated data") {
    // Two-column design: a count covariate and an intercept response relation.
    const std::size_t n = 60000;
    std::mt19937_64 rng(29);
    std::poisson_distribution<int> covariate(1.0);
    Matrix x(n, 2);
    std::vector<double> cov(n);
    for (std::size_t i = 0; i < n; ++i) cov[i] = covariate(rng);
    const double gamma_true = 0.4, icpt_true = -0.2;
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = cov[i];
        std::poisson_distribution<int> resp(std::exp(gamma_true * cov[i] + icpt_true));
        x(i, 1) = resp(rng);
    }
    const auto dn = train(x, Family::poisson);
    // Fisher information for (gamma, icpt): sum mu_i [c_i^2, c_i; c_i, 1]
    double f00 = 0, f01 = 0, f11 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = std::exp(gamma_true * cov[i] + icpt_true);
        f00 += mu * cov[i] * cov[i];
        f01 += mu * cov[i];
        f11 += mu;
    }
    const double det = f00 * f11 - f01 * f01;
    const double se_gamma = std::sqrt(f11 / det);
    const double se_icpt = std::sqrt(f00 / det);
    CHECK(std::abs(dn.coefficients[1][0] - gamma_true) <= 4.0 * se_gamma);
    CHECK(std::abs(dn.coefficients[1][1] - icpt_true) <= 4.0 * se_icpt);
}

TEST_CASE("poisson training on overdispersed counts stays near the target") {
    // Latent log-normal noise keeps E[y|x] = exp(x gamma); the regression
    // coefficient estimate remains consistent for the conditional mean.
    const std::size_t n = 80000;
    Matrix x(n, 2);
    std::mt19937_64 rng(31);
    std::poisson_distribution<int> covariate(1.0);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = covariate(rng);
    Matrix design(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = x(i, 0);
        design(i, 1) = 1.0;
    }
    const std::vector<double> gamma_true{0.3, -0.1};
    const auto y = generate_lognormal_poisson(design, gamma_true, 0.4, 77);
    for (std::size_t i = 0; i < n; ++i) x(i, 1) = y[i];
    const auto dn = train(x, Family::poisson);
    CHECK(std::abs(dn.coefficients[1][0] - 0.3) < 0.02);
    CHECK(std::abs(dn.coefficients[1][1] - (-0.1)) < 0.03);
}

TEST_CASE("gibbs sampling is deterministic per seed") {
    auto dn = make_gaussian_dn(2, false, {{0.5}, {0.5}});
    auto a = make_gibbs_state({0.0, 0.0}, 99);
    auto b = make_gibbs_state({0.0, 0.0}, 99);
    for (int t = 0; t < 50; ++t) {
        gibbs_step(dn, a);
        gibbs_step(dn, b);
    }
    CHECK(a.current == b.current);
    CHECK(a.step == 50);
}

TEST_CASE("gibbs chain for a symmetric gaussian network matches its stationary law") {
    // x0 | x1 ~ N(0.5 x1, 1), x1 | x0 ~ N(0.5 x0, 1) is consistent with a
    // bivariate normal with marginal variance 4/3 and correlation 0.5.
    auto dn = make_gaussian_dn(2, false, {{0.5}, {0.5}});
    auto st = make_gibbs_state({0.0, 0.0}, 2024);
    for (int t = 0; t < 2000; ++t) gibbs_step(dn, st);  // burn-in
    const int steps = 200000;
    double s0 = 0, s00 = 0, s01 = 0;
    for (int t = 0; t < steps; ++t) {
        gibbs_step(dn, st);
        s0 += st.current[0];
        s00 += st.current[0] * st.current[0];
        s01 += st.current[0] * st.current[1];
    }
    const double mean = s0 / steps;
    const double var = s00 / steps - mean * mean;
    const double cov = s01 / steps - mean * mean;
    // Autocorrelation of the sweep chain is rho = 0.25 per step for x0;
    // inflate the naive SE by sqrt((1+rho)/(1-rho)).
    const double se_mean = std::sqrt(4.0 / 3.0 / steps) * std::sqrt(1.25 / 0.75);
    CHECK(std::abs(mean) <= 4.0 * se_mean);
    CHECK(var == doctest::Approx(4.0 / 3.0).epsilon(0.05));
    CHECK(cov == doctest::Approx(0.5 * 4.0 / 3.0).epsilon(0.10));
}

TEST_CASE("gibbs chain for an independent poisson network has unit means") {
    DependencyNetwork dn;
    dn.family = Family::poisson;
    dn.d = 2;
    dn.intercept = false;
    dn.coefficients = {{0.0}, {0.0}};  // every conditional is Poisson(1)
    auto st = make_gibbs_state({0.0, 0.0}, 4);
    const int steps = 100000;
    double s = 0, ss = 0;
    for (int t = 0; t < steps; ++t) {
        gibbs_step(dn, st);
        s += st.current[0];
        ss += st.current[0] * st.current[0];
    }
    const double mean = s / steps;
    const double var = ss / steps - mean * mean;
    CHECK(std::abs(mean - 1.0) <= 4.0 / std::sqrt(static_cast<double>(steps)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("json round trip preserves coefficients bit-exactly") {
    const Matrix x = testutil::gaussian_matrix(20, 3, 37);
    auto dn = train(x, Family::gaussian);
    dn.variable_names = {"a", "b", "c"};
    const auto back = depnet_from_json(to_json(dn));
    CHECK(back.family == dn.family);
    CHECK(back.d == dn.d);
    CHECK(back.intercept == dn.intercept);
    CHECK(back.variable_names == dn.variable_names);
    REQUIRE(back.coefficients.size() == dn.coefficients.size());
    for (std::size_t i = 0; i < dn.coefficients.size(); ++i)
        CHECK(back.coefficients[i] == dn.coefficients[i]);

    const std::string path = "depnet_roundtrip_test.json";
    save_depnet(dn, path);
    const auto loaded = load_depnet(path);
    std::remove(path.c_str());
    for (std::size_t i = 0; i < dn.coefficients.size(); ++i)
        CHECK(loaded.coefficients[i] == dn.coefficients[i]);
}

TEST_CASE("json parser rejects malformed models") {
    CHECK_THROWS((void)depnet_from_json("{}"));
    CHECK_THROWS((void)depnet_from_json(
        R"({"family":"cauchy","d":2,"intercept":false,"coefficients":[[0.0],[0.0]]})"));
    CHECK_THROWS((void)depnet_from_json(
        R"({"family":"gaussian","d":3,"intercept":false,"coefficients":[[0.0],[0.0]]})"));
}

TEST_CASE("coreset-trained model is near optimal whenever distortion is small") {
    // Whenever the sampled operator achieves distortion <= eps, the loss of
    // the coreset-trained model on the full data must lie within (1 + 4 eps)
    // of the optimum.
    const double eps = 0.25;
    TrainOptions opts;
    opts.intercept = false;
    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Matrix x = testutil::gaussian_matrix(500, 4, 600 + seed);
        const ThinSVD svd = thin_svd(x);
        const auto profile =
            make_leverage_profile(svd, static_cast<double>(recommended_size(svd.rank, eps)));
        const auto op = draw_sampling_operator(profile.probabilities, seed);
        if (embedding_distortion(svd, op) > eps) continue;
        ++accepted;
        const auto c = coreset_from_operator(x, op);
        const double opt = gdn_loss(train(x, Family::gaussian, opts), x);
        const double approx = gdn_loss(train(c, Family::gaussian, opts), x);
        CHECK(approx <= (1.0 + 4.0 * eps) * opt + 1e-9);
        CHECK(approx >= opt - 1e-9);
    }
    CHECK(accepted * 3 >= 2 * 40);
}
