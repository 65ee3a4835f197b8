#pragma once

#include "daa/simd.hpp"

namespace daa::simd::detail {

extern const KernelTable kScalarTable;

#if defined(DAA_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace daa::simd::detail
