#include "cdn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cdn/coreset.hpp"
#include "cdn/leverage.hpp"
#include "cdn/structure.hpp"

namespace cdn {

LoadedCsv load_csv(std::istream& in, bool header, bool integer_columns) {
    LoadedCsv out;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    std::size_t d = 0;
    if (header) {
        if (!std::getline(in, line)) throw CsvParseError("missing header", 1, 1);
        ++lineno;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.names.push_back(cell);
        d = out.names.size();
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        std::size_t colno = 0;
        while (std::getline(ss, cell, ',')) {
            ++colno;
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw CsvParseError("non-numeric cell '" + cell + "'", lineno, colno);
            }
            if (pos != cell.size())
                throw CsvParseError("trailing characters in cell '" + cell + "'",
                                    lineno, colno);
            if (!std::isfinite(v))
                throw CsvParseError("non-finite cell", lineno, colno);
            if (integer_columns &&
                (v < 0.0 || std::abs(v - std::round(v)) > 1e-9))
                throw CsvParseError("expected nonnegative integer, got '" + cell + "'",
                                    lineno, colno);
            vals.push_back(v);
        }
        if (d == 0) d = vals.size();
        if (vals.size() != d)
            throw CsvParseError("ragged row: expected " + std::to_string(d) +
                                    " columns, got " + std::to_string(vals.size()),
                                lineno, 1);
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw CsvParseError("no data rows", lineno, 1);
    out.data = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), out.data.row(r).data());
    return out;
}

LoadedCsv load_csv(const std::string& path, bool header, bool integer_columns) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_csv: cannot open " + path);
    return load_csv(f, header, integer_columns);
}

void write_matrix_csv(const Matrix& x, std::ostream& out,
                      const std::vector<std::string>& names) {
    if (!names.empty()) {
        for (std::size_t j = 0; j < names.size(); ++j)
            out << (j ? "," : "") << names[j];
        out << '\n';
    }
    out.precision(17);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(i, j);
        out << '\n';
    }
}

void write_matrix_csv(const Matrix& x, const std::string& path,
                      const std::vector<std::string>& names) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_matrix_csv: cannot open " + path);
    write_matrix_csv(x, f, names);
}

TransformKind transform_kind_from_name(const std::string& name) {
    if (name == "log1p") return TransformKind::log1p;
    if (name == "clip01") return TransformKind::clip01;
    if (name == "floor") return TransformKind::floor;
    throw std::invalid_argument("unknown transform: " + name);
}

Matrix transform(const Matrix& x, TransformKind kind) {
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double& v = out(i, j);
            switch (kind) {
                case TransformKind::log1p:
                    if (v < -1.0)
                        throw std::invalid_argument("transform: log1p on value < -1");
                    v = std::log1p(v);
                    break;
                case TransformKind::clip01:
                    v = std::clamp(v, 0.0, 1.0);
                    break;
                case TransformKind::floor:
                    v = std::floor(v);
                    break;
            }
        }
    }
    return out;
}

double relative_error(double f_tilde, double f_star) {
    if (!(f_star > 0.0))
        throw std::invalid_argument("relative_error: reference must be > 0");
    return std::abs(f_tilde - f_star) / f_star;
}

std::string eval_method_name(EvalMethod m) {
    switch (m) {
        case EvalMethod::full: return "full";
        case EvalMethod::coreset: return "coreset";
        case EvalMethod::uniform: return "uniform";
    }
    return "?";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) +
                      0xbf58476d1ce4e5b9ULL * (b + 1) +
                      0x94d049bb133111ebULL * (c + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), x.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(x.row(idx[r]).data(), x.cols(), out.row(r).data());
    return out;
}

double rmse_on(const DependencyNetwork& dn, const Matrix& test,
               std::optional<TransformKind> pred_transform) {
    Matrix pred = predict(dn, test);
    if (pred_transform) pred = transform(pred, *pred_transform);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.values().size(); ++i) {
        const double dv = pred.values()[i] - test.values()[i];
        s += dv * dv;
    }
    return std::sqrt(s / static_cast<double>(pred.values().size()));
}

}  // namespace

std::vector<EvalReport> cross_validate(const Matrix& x,
                                       const CrossValidateOptions& opts) {
    const std::size_t n = x.rows();
    if (opts.folds < 2 || n < opts.folds)
        throw std::invalid_argument("cross_validate: need folds >= 2 and n >= folds");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(opts.seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    TrainOptions topts;
    topts.intercept = opts.intercept;
    topts.workers = opts.workers;

    using clock = std::chrono::steady_clock;
    std::vector<EvalReport> reports;

    for (std::size_t fold = 0; fold < opts.folds; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < n; ++i)
            (i % opts.folds == fold ? test_idx : train_idx).push_back(perm[i]);
        const Matrix xtr = take_rows(x, train_idx);
        const Matrix xte = take_rows(x, test_idx);
        const std::size_t ntr = xtr.rows();

        const auto t0 = clock::now();
        const DependencyNetwork full_dn = train(xtr, opts.family, topts);
        const double full_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        const double full_train_nlpl = neg_log_pseudo_likelihood(full_dn, xtr);
        const Matrix full_adj = adjacency(full_dn);

        // Leverage profile of the train split is shared by all coreset cells.
        ThinSVD svd;
        std::vector<double> scores;
        const bool need_coreset =
            std::find(opts.methods.begin(), opts.methods.end(), EvalMethod::coreset) !=
            opts.methods.end();
        if (need_coreset) {
            svd = thin_svd(xtr);
            scores = leverage_scores(svd);
        }

        for (std::size_t mi = 0; mi < opts.methods.size(); ++mi) {
            const EvalMethod method = opts.methods[mi];
            const std::vector<double> fractions =
                method == EvalMethod::full ? std::vector<double>{1.0} : opts.fractions;
            for (double frac : fractions) {
                EvalReport rep;
                rep.method = method;
                rep.family = opts.family;
                rep.fraction = frac;
                rep.fold = fold;
                rep.intercept = opts.intercept;
                rep.seed = derive_seed(opts.seed, fold, mi,
                                       static_cast<std::uint64_t>(frac * 1e6));
                try {
                    if (method == EvalMethod::full) {
                        rep.train_seconds = full_seconds;
                        rep.nlpl = neg_log_pseudo_likelihood(full_dn, xte);
                        rep.rmse = rmse_on(full_dn, xte, opts.prediction_transform);
                        rep.relative_error = 0.0;
                        rep.frobenius_to_full = 0.0;
                        reports.push_back(rep);
                        continue;
                    }

                    const std::size_t m = std::min<std::size_t>(
                        ntr, static_cast<std::size_t>(
                                 std::ceil(frac * static_cast<double>(ntr))));
                    if (m < 1)
                        throw std::invalid_argument("cross_validate: fraction too small");

                    const auto c0 = clock::now();
                    WeightedCoreset cs;
                    if (method == EvalMethod::coreset) {
                        double k = size_param_for_expected(scores,
                                                           static_cast<double>(m));
                        if (opts.boost_logd && x.cols() >= 2)
                            k *= std::ceil(std::log(static_cast<double>(x.cols())));
                        rep.size_param = k;
                        const LeverageProfile profile = make_leverage_profile(svd, k);
                        // Redraw on an empty draw, advancing the seed.
                        std::uint64_t s = rep.seed;
                        for (int attempt = 0;; ++attempt) {
                            try {
                                const SamplingOperator op =
                                    draw_sampling_operator(profile.probabilities, s);
                                cs = coreset_from_operator(xtr, op);
                                break;
                            } catch (const EmptyDrawError&) {
                                if (attempt >= 16) throw;
                                s = derive_seed(s, 1, 2, 3);
                            }
                        }
                        rep.seed = cs.seed;
                    } else {
                        rep.size_param = static_cast<double>(m);
                        cs = build_uniform_coreset(xtr, m, rep.seed);
                    }
                    const DependencyNetwork dn = train(cs, opts.family, topts);
                    rep.train_seconds =
                        std::chrono::duration<double>(clock::now() - c0).count();

                    rep.nlpl = neg_log_pseudo_likelihood(dn, xte);
                    rep.rmse = rmse_on(dn, xte, opts.prediction_transform);
                    rep.relative_error = relative_error(
                        neg_log_pseudo_likelihood(dn, xtr), full_train_nlpl);
                    rep.frobenius_to_full = frobenius_difference(adjacency(dn), full_adj);
                    reports.push_back(rep);
                } catch (const std::exception& e) {
                    throw std::runtime_error(
                        "cross_validate: fold " + std::to_string(fold) + ", method " +
                        eval_method_name(method) + ", fraction " +
                        std::to_string(frac) + ": " + e.what());
                }
            }
        }
    }
    return reports;
}

void write_reports_csv(const std::vector<EvalReport>& reports, std::ostream& out) {
    out << "method,family,fraction,fold,nlpl,rmse,relative_error,"
           "frobenius_to_full,train_seconds,seed\n";
    out.precision(17);
    for (const auto& r : reports) {
        out << eval_method_name(r.method) << ','
            << (r.family == Family::gaussian ? "gaussian" : "poisson") << ','
            << r.fraction << ',' << r.fold << ',' << r.nlpl << ',' << r.rmse << ','
            << r.relative_error << ',' << r.frobenius_to_full << ','
            << r.train_seconds << ',' << r.seed << '\n';
    }
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_reports_csv: cannot open " + path);
    write_reports_csv(reports, f);
}

std::string reports_to_json(const std::vector<EvalReport>& reports,
                            const CrossValidateOptions& opts) {
    nlohmann::json j;
    nlohmann::json cfg;
    cfg["family"] = opts.family == Family::gaussian ? "gaussian" : "poisson";
    cfg["folds"] = opts.folds;
    cfg["seed"] = opts.seed;
    cfg["intercept"] = opts.intercept;
    cfg["const_d"] = opts.const_d;
    cfg["boost_logd"] = opts.boost_logd;
    cfg["fractions"] = opts.fractions;
    std::vector<std::string> methods;
    for (auto m : opts.methods) methods.push_back(eval_method_name(m));
    cfg["methods"] = methods;
    j["config"] = cfg;

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json row;
        row["method"] = eval_method_name(r.method);
        row["family"] = r.family == Family::gaussian ? "gaussian" : "poisson";
        row["fraction"] = r.fraction;
        row["fold"] = r.fold;
        row["nlpl"] = r.nlpl;
        row["rmse"] = r.rmse;
        row["relative_error"] = r.relative_error;
        row["frobenius_to_full"] = r.frobenius_to_full;
        row["train_seconds"] = r.train_seconds;
        row["seed"] = r.seed;
        row["intercept"] = r.intercept;
        row["size_param"] = r.size_param;
        rows.push_back(row);
    }
    j["reports"] = rows;
    return j.dump(2);
}

}  // namespace cdn
