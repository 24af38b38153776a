#include "cdn/kernels.hpp"

#include <arm_neon.h>

namespace cdn::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sumsq_neon(const double* x, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t a = vld1q_f64(x + i);
        acc0 = vfmaq_f64(acc0, a, a);
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double weighted_sumsq_neon(const double* x, const double* w, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t a = vld1q_f64(x + i);
        acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(w + i), a), a);
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += w[i] * x[i] * x[i];
    return acc;
}

double weighted_dot_neon(const double* x, const double* y, const double* w,
                         std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t a = vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i));
        acc0 = vfmaq_f64(acc0, a, vld1q_f64(y + i));
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{dot_neon,          sumsq_neon, weighted_sumsq_neon,
                         weighted_dot_neon, axpy_neon,  scale_neon};
    return ops;
}

}  // namespace cdn::kernels
