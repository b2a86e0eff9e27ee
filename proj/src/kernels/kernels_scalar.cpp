#include <cmath>

#include "brilliant/kernels/kernels.hpp"

namespace brilliant::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* dz, double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dz[r];
    if (g == 0.0) continue;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dx[c] += g * row[c];
  }
}

void ger_acc_scalar(double* dw, std::size_t rows, std::size_t cols, const double* dz, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dz[r];
    if (g == 0.0) continue;
    double* row = dw + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += g * x[c];
  }
}

void adamw_scalar(double* w, const double* g, double* m, double* v, std::size_t n, const AdamStep& s) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (g[i] * g[i]);
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    w[i] -= s.lr * (m_hat / (std::sqrt(v_hat) + s.eps) + s.weight_decay * w[i]);
  }
}

constexpr KernelTable kScalar{
    "scalar",     dot_scalar,     squared_distance_scalar, gemv_scalar, gemv_t_acc_scalar,
    ger_acc_scalar, adamw_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace brilliant::kernels
