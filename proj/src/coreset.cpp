#include "cdn/coreset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace cdn {

WeightedCoreset coreset_from_operator(const Matrix& x, const SamplingOperator& s) {
    if (s.origin_rows != x.rows())
        throw std::invalid_argument("coreset_from_operator: operator/data mismatch");
    WeightedCoreset c;
    const std::size_t m = s.selected.size(), d = x.cols();
    c.data = Matrix(m, d);
    c.weights.resize(m);
    c.source_indices.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const auto& e = s.selected[r];
        std::copy_n(x.row(e.index).data(), d, c.data.row(r).data());
        c.weights[r] = e.weight;
        c.source_indices[r] = e.index;
    }
    c.method = SamplingMethod::leverage;
    c.seed = s.seed;
    return c;
}

WeightedCoreset build_leverage_coreset(const Matrix& x, double eps,
                                       std::uint64_t seed,
                                       const LeverageCoresetOptions& opts) {
    ThinSVD svd = thin_svd(x);
    double k;
    if (opts.size_param_override > 0.0) {
        k = opts.size_param_override;
    } else {
        k = static_cast<double>(recommended_size(svd.rank, eps, opts.const_d));
        if (opts.boost_logd && x.cols() >= 2)
            k *= std::ceil(std::log(static_cast<double>(x.cols())));
    }
    LeverageProfile profile = make_leverage_profile(svd, k);
    SamplingOperator op = draw_sampling_operator(profile.probabilities, seed);
    return coreset_from_operator(x, op);
}

WeightedCoreset build_uniform_coreset(const Matrix& x, std::size_t m,
                                      std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (m < 1 || m > n)
        throw std::invalid_argument("build_uniform_coreset: m out of [1, n]");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates, then sort so indices are increasing.
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());

    WeightedCoreset c;
    const std::size_t d = x.cols();
    c.data = Matrix(m, d);
    c.weights.assign(m, static_cast<double>(n) / static_cast<double>(m));
    c.source_indices = idx;
    for (std::size_t r = 0; r < m; ++r)
        std::copy_n(x.row(idx[r]).data(), d, c.data.row(r).data());
    c.method = SamplingMethod::uniform;
    c.seed = seed;
    return c;
}

void write_coreset_csv(const WeightedCoreset& c, std::ostream& out) {
    out << "index,weight";
    for (std::size_t j = 0; j < c.data.cols(); ++j) out << ",x" << j;
    out << '\n';
    out.precision(17);
    for (std::size_t r = 0; r < c.size(); ++r) {
        out << c.source_indices[r] << ',' << c.weights[r];
        for (std::size_t j = 0; j < c.data.cols(); ++j) out << ',' << c.data(r, j);
        out << '\n';
    }
}

void write_coreset_csv(const WeightedCoreset& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_coreset_csv: cannot open " + path);
    write_coreset_csv(c, f);
}

WeightedCoreset read_coreset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_coreset_csv: empty file");
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> indices;
    std::vector<double> weights;
    std::size_t d = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 3)
            throw std::runtime_error("read_coreset_csv: too few columns");
        if (d == 0) d = vals.size() - 2;
        if (vals.size() - 2 != d)
            throw std::runtime_error("read_coreset_csv: ragged row");
        indices.push_back(static_cast<std::size_t>(vals[0]));
        weights.push_back(vals[1]);
        rows.emplace_back(vals.begin() + 2, vals.end());
    }
    if (rows.empty()) throw std::runtime_error("read_coreset_csv: no data rows");
    WeightedCoreset c;
    c.data = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), c.data.row(r).data());
    c.weights = std::move(weights);
    c.source_indices = std::move(indices);
    return c;
}

WeightedCoreset read_coreset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_coreset_csv: cannot open " + path);
    return read_coreset_csv(f);
}

}  // namespace cdn
