#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdn/leverage.hpp"
#include "cdn/matrix.hpp"

namespace cdn {

enum class SamplingMethod { leverage, uniform };

// Weighted subset of the data rows acting as proxy training set.
struct WeightedCoreset {
    Matrix data;                        // m x d selected rows
    std::vector<double> weights;        // length m, positive
    std::vector<std::size_t> source_indices;
    SamplingMethod method = SamplingMethod::leverage;
    std::uint64_t seed = 0;

    std::size_t size() const { return data.rows(); }
};

struct LeverageCoresetOptions {
    double const_d = 1.0;
    // Multiply k by ceil(log d) for a union bound over the d per-variable
    // regressions. Off by default.
    bool boost_logd = false;
    // When > 0, overrides the recommended size parameter entirely (used by
    // the harness to match a target expected size).
    double size_param_override = 0.0;
};

WeightedCoreset build_leverage_coreset(const Matrix& x, double eps,
                                       std::uint64_t seed,
                                       const LeverageCoresetOptions& opts = {});

// Materializes an already-drawn operator against its data matrix.
WeightedCoreset coreset_from_operator(const Matrix& x, const SamplingOperator& s);

// m distinct rows uniformly without replacement, each with weight n/m.
WeightedCoreset build_uniform_coreset(const Matrix& x, std::size_t m,
                                      std::uint64_t seed);

// CSV with header: index,weight,x0,...,x{d-1}
void write_coreset_csv(const WeightedCoreset& c, std::ostream& out);
void write_coreset_csv(const WeightedCoreset& c, const std::string& path);
WeightedCoreset read_coreset_csv(std::istream& in);
WeightedCoreset read_coreset_csv(const std::string& path);

}  // namespace cdn
