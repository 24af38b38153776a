#include "cdn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdn/kernels.hpp"

namespace cdn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_)
        throw std::invalid_argument("Matrix: value count does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool Matrix::finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

std::vector<double> Matrix::multiply(std::span<const double> gamma) const {
    if (gamma.size() != cols_)
        throw std::invalid_argument("multiply: gamma length != cols");
    const auto& k = kernels::active();
    std::vector<double> y(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        y[i] = k.dot(row(i).data(), gamma.data(), cols_);
    return y;
}

double frobenius_norm(const Matrix& x) {
    return std::sqrt(kernels::active().sumsq(x.values().data(), x.values().size()));
}

namespace {

// One-sided Jacobi on the columns of X, held transposed so each working
// column is contiguous.
struct JacobiResult {
    Matrix cols;  // d x n, row j = j-th rotated column of X
    Matrix v;     // d x d accumulated rotations (X = W V^T, W = rotated cols)
};

JacobiResult one_sided_jacobi(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    JacobiResult r{x.transposed(), Matrix::identity(d)};
    const auto& k = kernels::active();

    const double off_tol = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double* ap = r.cols.row(p).data();
                double* aq = r.cols.row(q).data();
                const double alpha = k.sumsq(ap, n);
                const double beta = k.sumsq(aq, n);
                const double gamma = k.dot(ap, aq, n);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= off_tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double a = ap[i], b = aq[i];
                    ap[i] = c * a - s * b;
                    aq[i] = s * a + c * b;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double a = r.v(i, p), b = r.v(i, q);
                    r.v(i, p) = c * a - s * b;
                    r.v(i, q) = s * a + c * b;
                }
            }
        }
        if (!rotated) break;
    }
    return r;
}

}  // namespace

ThinSVD thin_svd(const Matrix& x, double rank_tol) {
    if (x.rows() == 0 || x.cols() == 0)
        throw std::invalid_argument("thin_svd: empty matrix");
    if (!x.finite()) throw std::invalid_argument("thin_svd: non-finite entries");
    if (rank_tol <= 0.0) throw std::invalid_argument("thin_svd: rank_tol must be > 0");

    const std::size_t n = x.rows(), d = x.cols();
    JacobiResult jr = one_sided_jacobi(x);
    const auto& k = kernels::active();

    std::vector<double> sigma(d);
    for (std::size_t j = 0; j < d; ++j)
        sigma[j] = std::sqrt(k.sumsq(jr.cols.row(j).data(), n));

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    const double sigma_max = sigma[order[0]];
    if (sigma_max == 0.0)
        throw ZeroRankError("thin_svd: matrix has rank zero");

    std::size_t rank = 0;
    while (rank < d && sigma[order[rank]] > rank_tol * sigma_max) ++rank;

    ThinSVD out;
    out.rank = rank;
    out.singular_values.resize(rank);
    out.u = Matrix(n, rank);
    out.vt = Matrix(rank, d);
    for (std::size_t r = 0; r < rank; ++r) {
        const std::size_t j = order[r];
        out.singular_values[r] = sigma[j];
        const double inv = 1.0 / sigma[j];
        const double* cj = jr.cols.row(j).data();
        for (std::size_t i = 0; i < n; ++i) out.u(i, r) = cj[i] * inv;
        for (std::size_t i = 0; i < d; ++i) out.vt(r, i) = jr.v(i, j);
    }
    return out;
}

double spectral_norm(const Matrix& a, double tol) {
    if (!a.finite()) throw std::invalid_argument("spectral_norm: non-finite entries");
    const std::size_t n = a.rows(), d = a.cols();
    // Gram of the thinner side keeps the iteration matrix small.
    const bool use_cols = d <= n;
    const std::size_t m = use_cols ? d : n;
    Matrix g(m, m);
    const auto& k = kernels::active();
    if (use_cols) {
        Matrix at = a.transposed();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j)
                g(i, j) = g(j, i) = k.dot(at.row(i).data(), at.row(j).data(), n);
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j)
                g(i, j) = g(j, i) = k.dot(a.row(i).data(), a.row(j).data(), d);
    }

    double gmax = 0.0;
    for (double v : g.values()) gmax = std::max(gmax, std::abs(v));
    if (gmax == 0.0) return 0.0;

    // Deterministic non-degenerate start.
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i % 7);
    double nv = std::sqrt(k.sumsq(v.data(), m));
    k.scale(1.0 / nv, v.data(), m);

    double lambda = 0.0;
    const int max_iter = 100000;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> gv = g.multiply(v);
        const double next = k.dot(v.data(), gv.data(), m);
        const double norm_gv = std::sqrt(k.sumsq(gv.data(), m));
        if (norm_gv == 0.0) return 0.0;
        k.scale(1.0 / norm_gv, gv.data(), m);
        v.swap(gv);
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
            lambda = next;
            return std::sqrt(std::max(lambda, 0.0));
        }
        lambda = next;
    }
    throw SpectralNormError("spectral_norm: power iteration did not converge",
                            std::sqrt(std::max(lambda, 0.0)));
}

std::vector<double> solve_weighted_least_squares(const Matrix& a,
                                                 std::span<const double> b,
                                                 std::span<const double> w) {
    const std::size_t n = a.rows(), d = a.cols();
    if (b.size() != n || w.size() != n)
        throw std::invalid_argument("solve_weighted_least_squares: length mismatch");
    bool any_positive = false;
    for (double wi : w) {
        if (wi < 0.0)
            throw std::invalid_argument("solve_weighted_least_squares: negative weight");
        any_positive |= wi > 0.0;
    }
    if (!any_positive)
        throw std::invalid_argument("solve_weighted_least_squares: all weights zero");

    Matrix as(n, d);
    std::vector<double> bs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(w[i]);
        for (std::size_t j = 0; j < d; ++j) as(i, j) = s * a(i, j);
        bs[i] = s * b[i];
    }

    ThinSVD svd;
    try {
        svd = thin_svd(as);
    } catch (const ZeroRankError&) {
        return std::vector<double>(d, 0.0);  // minimum-norm solution
    }

    const auto& k = kernels::active();
    // gamma = V diag(1/sigma) U^T b
    std::vector<double> ub(svd.rank);
    Matrix ut = svd.u.transposed();
    for (std::size_t r = 0; r < svd.rank; ++r)
        ub[r] = k.dot(ut.row(r).data(), bs.data(), n) / svd.singular_values[r];
    std::vector<double> gamma(d, 0.0);
    for (std::size_t r = 0; r < svd.rank; ++r)
        k.axpy(ub[r], svd.vt.row(r).data(), gamma.data(), d);
    return gamma;
}

}  // namespace cdn
