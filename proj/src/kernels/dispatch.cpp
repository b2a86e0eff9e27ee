#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "brilliant/kernels/kernels.hpp"
#include "kernels_internal.hpp"

namespace brilliant::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(BRILLIANT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
  const KernelTable* t = table_for(default_isa());
  return t ? t : &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

}  // namespace

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar_table();
    case Isa::Avx2:
#if defined(BRILLIANT_HAVE_AVX2)
      if (cpu_has_avx2()) return detail::avx2_table();
#endif
      return nullptr;
    case Isa::Neon:
#if defined(BRILLIANT_HAVE_NEON)
      return detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (const Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
    if (table_for(isa)) out.push_back(isa);
  return out;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

Isa default_isa() {
  if (const char* env = std::getenv("BRILLIANT_KERNELS")) {
    const std::string want(env);
    for (const Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
      if (want == isa_name(isa) && table_for(isa)) return isa;
  }
  if (table_for(Isa::Avx2)) return Isa::Avx2;
  if (table_for(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() {
  const KernelTable* t = &active();
  for (const Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
    if (table_for(isa) == t) return isa;
  return Isa::Scalar;
}

void select(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t) throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  active_slot().store(t, std::memory_order_release);
}

}  // namespace brilliant::kernels
