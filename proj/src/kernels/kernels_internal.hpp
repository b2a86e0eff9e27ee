#pragma once

#include "brilliant/kernels/kernels.hpp"

namespace brilliant::kernels::detail {

#if defined(BRILLIANT_HAVE_AVX2)
const KernelTable* avx2_table();
#endif
#if defined(BRILLIANT_HAVE_NEON)
const KernelTable* neon_table();
#endif

}  // namespace brilliant::kernels::detail
