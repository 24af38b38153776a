#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdn/depnet.hpp"
#include "cdn/matrix.hpp"

namespace cdn {

struct CsvParseError : std::runtime_error {
    CsvParseError(const std::string& what, std::size_t row, std::size_t col)
        : std::runtime_error(what + " (row " + std::to_string(row) + ", col " +
                             std::to_string(col) + ")"),
          row(row),
          col(col) {}
    std::size_t row, col;
};

struct LoadedCsv {
    Matrix data;
    std::vector<std::string> names;  // empty when the file had no header
};

// Rectangular numeric CSV. integer_columns additionally requires every cell
// to be a nonnegative integer (count data).
LoadedCsv load_csv(const std::string& path, bool header,
                   bool integer_columns = false);
LoadedCsv load_csv(std::istream& in, bool header, bool integer_columns = false);

void write_matrix_csv(const Matrix& x, std::ostream& out,
                      const std::vector<std::string>& names = {});
void write_matrix_csv(const Matrix& x, const std::string& path,
                      const std::vector<std::string>& names = {});

enum class TransformKind { log1p, clip01, floor };
TransformKind transform_kind_from_name(const std::string& name);

Matrix transform(const Matrix& x, TransformKind kind);

// |f_tilde - f_star| / f_star
double relative_error(double f_tilde, double f_star);

enum class EvalMethod { full, coreset, uniform };
std::string eval_method_name(EvalMethod m);

struct EvalReport {
    EvalMethod method = EvalMethod::full;
    Family family = Family::gaussian;
    double fraction = 1.0;
    std::size_t fold = 0;
    double nlpl = 0.0;
    double rmse = 0.0;
    double relative_error = 0.0;
    double frobenius_to_full = 0.0;
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
    // config echo
    bool intercept = true;
    double size_param = 0.0;  // k for coreset cells, m for uniform cells
};

struct CrossValidateOptions {
    Family family = Family::gaussian;
    std::vector<EvalMethod> methods = {EvalMethod::full};
    std::vector<double> fractions = {1.0};  // ignored for the full method
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    bool intercept = true;
    double const_d = 1.0;
    bool boost_logd = false;
    std::optional<TransformKind> prediction_transform;
    std::size_t workers = 1;
};

// 10-fold-style protocol: per fold x method x fraction, train on the
// (optionally compressed) train split, evaluate NLPL/RMSE on the test split.
// The relative error compares against the full-data model of the same fold
// on the train split's pseudo-likelihood.
std::vector<EvalReport> cross_validate(const Matrix& x,
                                       const CrossValidateOptions& opts);

// Fixed column order:
// method,family,fraction,fold,nlpl,rmse,relative_error,frobenius_to_full,train_seconds,seed
void write_reports_csv(const std::vector<EvalReport>& reports, std::ostream& out);
void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path);
std::string reports_to_json(const std::vector<EvalReport>& reports,
                            const CrossValidateOptions& opts);

// Deterministic per-cell seed derivation (splitmix64 over the run seed).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

}  // namespace cdn
