#include "cdn/depnet.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "cdn/kernels.hpp"

namespace cdn {

double DependencyNetwork::linear_predictor(std::size_t i,
                                           std::span<const double> row) const {
    const auto& g = coefficients[i];
    double lp = 0.0;
    std::size_t c = 0;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        lp += g[c++] * row[j];
    }
    if (intercept) lp += g[c];
    return lp;
}

double DependencyNetwork::conditional_mean(std::size_t i,
                                           std::span<const double> row) const {
    const double lp = linear_predictor(i, row);
    if (family == Family::poisson)
        return std::exp(std::min(lp, kLinearPredictorClamp));
    return lp;
}

Matrix design_for_variable(const Matrix& x, std::size_t i, bool intercept) {
    const std::size_t n = x.rows(), d = x.cols();
    const std::size_t p = (d - 1) + (intercept ? 1 : 0);
    Matrix a(n, p);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (j == i) continue;
            a(r, c++) = x(r, j);
        }
        if (intercept) a(r, c) = 1.0;
    }
    return a;
}

namespace {

DependencyNetwork train_impl(const Matrix& x, std::span<const double> weights,
                             Family family, const TrainOptions& opts) {
    const std::size_t n = x.rows(), d = x.cols();
    if (d < 2) throw std::invalid_argument("train: need at least 2 variables");
    if (!x.finite()) throw std::invalid_argument("train: non-finite data");
    if (!weights.empty() && weights.size() != n)
        throw std::invalid_argument("train: weight length mismatch");

    std::vector<double> unit;
    if (weights.empty()) {
        unit.assign(n, 1.0);
        weights = unit;
    }

    DependencyNetwork dn;
    dn.family = family;
    dn.d = d;
    dn.intercept = opts.intercept;
    dn.coefficients.resize(d);

    const auto fit_variable = [&](std::size_t i) {
        Matrix a = design_for_variable(x, i, opts.intercept);
        std::vector<double> y = x.col(i);
        try {
            if (family == Family::gaussian) {
                dn.coefficients[i] = fit_gaussian(a, y, weights).coefficients;
            } else {
                PoissonFitOptions po = opts.poisson;
                if (opts.intercept)
                    po.intercept_column = static_cast<int>(a.cols()) - 1;
                dn.coefficients[i] = fit_poisson(a, y, weights, po).coefficients;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("train: variable " + std::to_string(i) + ": " +
                                     e.what());
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, opts.workers);
    if (workers == 1 || d < 2 * workers) {
        for (std::size_t i = 0; i < d; ++i) fit_variable(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < d; i += workers) fit_variable(i);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    return dn;
}

}  // namespace

DependencyNetwork train(const Matrix& x, Family family, const TrainOptions& opts) {
    return train_impl(x, {}, family, opts);
}

DependencyNetwork train(const Matrix& x, std::span<const double> weights,
                        Family family, const TrainOptions& opts) {
    return train_impl(x, weights, family, opts);
}

DependencyNetwork train(const WeightedCoreset& c, Family family,
                        const TrainOptions& opts) {
    return train_impl(c.data, c.weights, family, opts);
}

double gdn_loss(const DependencyNetwork& dn, const Matrix& x,
                std::span<const double> weights) {
    if (dn.family != Family::gaussian)
        throw std::invalid_argument("gdn_loss: gaussian family only");
    if (x.cols() != dn.d) throw std::invalid_argument("gdn_loss: dimension mismatch");
    const std::size_t n = x.rows();
    if (!weights.empty() && weights.size() != n)
        throw std::invalid_argument("gdn_loss: weight length mismatch");
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double w = weights.empty() ? 1.0 : weights[r];
        const auto row = x.row(r);
        for (std::size_t i = 0; i < dn.d; ++i) {
            const double resid = dn.linear_predictor(i, row) - row[i];
            loss += w * resid * resid;
        }
    }
    return loss;
}

double neg_log_pseudo_likelihood(const DependencyNetwork& dn, const Matrix& x,
                                 std::span<const double> weights) {
    if (x.cols() != dn.d)
        throw std::invalid_argument("neg_log_pseudo_likelihood: dimension mismatch");
    const std::size_t n = x.rows();
    if (!weights.empty() && weights.size() != n)
        throw std::invalid_argument("neg_log_pseudo_likelihood: weight length mismatch");

    if (dn.family == Family::gaussian) {
        double total_weight = 0.0;
        if (weights.empty()) {
            total_weight = static_cast<double>(n);
        } else {
            for (double w : weights) total_weight += w;
        }
        // Unit conditional variance: per cell 1/2 resid^2 + 1/2 ln(2 pi).
        return 0.5 * gdn_loss(dn, x, weights) +
               0.5 * std::log(2.0 * std::numbers::pi) * total_weight *
                   static_cast<double>(dn.d);
    }

    double nll = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double w = weights.empty() ? 1.0 : weights[r];
        const auto row = x.row(r);
        for (std::size_t i = 0; i < dn.d; ++i) {
            const double y = row[i];
            if (!(y >= 0.0) || std::abs(y - std::round(y)) > 1e-9)
                throw std::invalid_argument(
                    "neg_log_pseudo_likelihood: poisson needs count data");
            const double lp =
                std::min(dn.linear_predictor(i, row), kLinearPredictorClamp);
            nll += w * (std::exp(lp) - y * lp + std::lgamma(y + 1.0));
        }
    }
    return nll;
}

Matrix predict(const DependencyNetwork& dn, const Matrix& x) {
    if (x.cols() != dn.d) throw std::invalid_argument("predict: dimension mismatch");
    Matrix out(x.rows(), dn.d);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t i = 0; i < dn.d; ++i)
            out(r, i) = dn.conditional_mean(i, x.row(r));
    return out;
}

std::vector<double> residual_variances(const DependencyNetwork& dn, const Matrix& x) {
    if (dn.family != Family::gaussian)
        throw std::invalid_argument("residual_variances: gaussian family only");
    std::vector<double> vars(dn.d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        for (std::size_t i = 0; i < dn.d; ++i) {
            const double resid = dn.linear_predictor(i, row) - row[i];
            vars[i] += resid * resid;
        }
    }
    for (double& v : vars) v /= static_cast<double>(x.rows());
    return vars;
}

GibbsState make_gibbs_state(std::vector<double> start, std::uint64_t seed) {
    GibbsState s;
    s.current = std::move(start);
    s.seed = seed;
    s.rng.seed(seed);
    return s;
}

void gibbs_step(const DependencyNetwork& dn, GibbsState& state) {
    if (state.current.size() != dn.d)
        throw std::invalid_argument("gibbs_step: state dimension mismatch");
    for (std::size_t i = 0; i < dn.d; ++i) {
        const double lp = dn.linear_predictor(i, state.current);
        if (dn.family == Family::gaussian) {
            std::normal_distribution<double> dist(lp, 1.0);
            state.current[i] = dist(state.rng);
        } else {
            const double rate = std::exp(std::min(lp, kLinearPredictorClamp));
            if (!std::isfinite(rate))
                throw std::runtime_error("gibbs_step: non-finite poisson rate");
            std::poisson_distribution<long long> dist(rate);
            state.current[i] = static_cast<double>(dist(state.rng));
        }
    }
    ++state.step;
}

std::string to_json(const DependencyNetwork& dn) {
    nlohmann::json j;
    j["family"] = dn.family == Family::gaussian ? "gaussian" : "poisson";
    j["d"] = dn.d;
    j["intercept"] = dn.intercept;
    j["variable_names"] = dn.variable_names;
    j["coefficients"] = dn.coefficients;
    return j.dump(2);
}

DependencyNetwork depnet_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DependencyNetwork dn;
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "gaussian") {
        dn.family = Family::gaussian;
    } else if (fam == "poisson") {
        dn.family = Family::poisson;
    } else {
        throw std::runtime_error("depnet_from_json: unknown family " + fam);
    }
    dn.d = j.at("d").get<std::size_t>();
    dn.intercept = j.at("intercept").get<bool>();
    dn.variable_names = j.at("variable_names").get<std::vector<std::string>>();
    dn.coefficients = j.at("coefficients").get<std::vector<std::vector<double>>>();
    if (dn.coefficients.size() != dn.d)
        throw std::runtime_error("depnet_from_json: coefficient count != d");
    const std::size_t expect = (dn.d - 1) + (dn.intercept ? 1 : 0);
    for (const auto& g : dn.coefficients)
        if (g.size() != expect)
            throw std::runtime_error("depnet_from_json: bad coefficient length");
    return dn;
}

void save_depnet(const DependencyNetwork& dn, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_depnet: cannot open " + path);
    f << to_json(dn) << '\n';
}

DependencyNetwork load_depnet(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_depnet: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return depnet_from_json(text);
}

}  // namespace cdn
