#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Dense double-precision kernels behind the training stack. Each ISA provides
// the same table; the scalar table is the reference every other variant is
// tested against. Within one ISA results are bit-reproducible (fixed lane
// assignment and reduction order); across ISAs they agree to rounding.

namespace brilliant::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct AdamStep {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  // 1 - beta^t, precomputed by the caller.
  double bias_correction1 = 1.0;
  double bias_correction2 = 1.0;
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y = W x + bias; W is rows x cols row-major.
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias, double* y);
  // dx += W^T dz.
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* dz, double* dx);
  // dW += dz x^T.
  void (*ger_acc)(double* dw, std::size_t rows, std::size_t cols, const double* dz, const double* x);
  // Adam with decoupled weight decay, elementwise over n parameters.
  void (*adamw)(double* w, const double* g, double* m, double* v, std::size_t n, const AdamStep& step);
};

const KernelTable& scalar_table();

// nullptr when the ISA was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa);

std::vector<Isa> available_isas();
std::string_view isa_name(Isa isa);

// Best ISA for this CPU, unless BRILLIANT_KERNELS=scalar|avx2|neon overrides.
Isa default_isa();

// Process-wide active table. select() throws std::invalid_argument for an
// unavailable ISA.
const KernelTable& active();
Isa active_isa();
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace brilliant::kernels
