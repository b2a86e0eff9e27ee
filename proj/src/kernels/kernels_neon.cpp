// AArch64 only; NEON is part of the base ISA there so no runtime probe.

#include <arm_neon.h>

#include <cmath>

#include "brilliant/kernels/kernels.hpp"
#include "kernels_internal.hpp"

namespace brilliant::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void gemv_neon(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
               double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = bias[r] + dot_neon(w + r * cols, x, cols);
}

inline void axpy_neon(double g, const double* src, double* dst, std::size_t n) {
  const float64x2_t gv = vdupq_n_f64(g);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vfmaq_f64(vld1q_f64(dst + i), gv, vld1q_f64(src + i)));
  for (; i < n; ++i) dst[i] += g * src[i];
}

void gemv_t_acc_neon(const double* w, std::size_t rows, std::size_t cols, const double* dz, double* dx) {
  for (std::size_t r = 0; r < rows; ++r)
    if (dz[r] != 0.0) axpy_neon(dz[r], w + r * cols, dx, cols);
}

void ger_acc_neon(double* dw, std::size_t rows, std::size_t cols, const double* dz, const double* x) {
  for (std::size_t r = 0; r < rows; ++r)
    if (dz[r] != 0.0) axpy_neon(dz[r], x, dw + r * cols, cols);
}

void adamw_neon(double* w, const double* g, double* m, double* v, std::size_t n, const AdamStep& s) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gi = vld1q_f64(g + i);
    const float64x2_t mi =
        vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), s.beta1), vmulq_n_f64(gi, 1.0 - s.beta1));
    const float64x2_t vi =
        vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), s.beta2), vmulq_n_f64(vmulq_f64(gi, gi), 1.0 - s.beta2));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t m_hat = vdivq_f64(mi, vdupq_n_f64(s.bias_correction1));
    const float64x2_t v_hat = vdivq_f64(vi, vdupq_n_f64(s.bias_correction2));
    const float64x2_t wi = vld1q_f64(w + i);
    const float64x2_t step = vaddq_f64(vdivq_f64(m_hat, vaddq_f64(vsqrtq_f64(v_hat), vdupq_n_f64(s.eps))),
                                       vmulq_n_f64(wi, s.weight_decay));
    vst1q_f64(w + i, vsubq_f64(wi, vmulq_n_f64(step, s.lr)));
  }
  for (; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (g[i] * g[i]);
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    w[i] -= s.lr * (m_hat / (std::sqrt(v_hat) + s.eps) + s.weight_decay * w[i]);
  }
}

constexpr KernelTable kNeon{
    "neon",       dot_neon,     squared_distance_neon, gemv_neon, gemv_t_acc_neon,
    ger_acc_neon, adamw_neon,
};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace brilliant::kernels
