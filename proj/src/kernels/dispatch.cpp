#include <cstdlib>
#include <string_view>

#include "dp2s/kernels.hpp"

namespace dp2s::kernels {

#if defined(DP2S_HAVE_AVX2)
const KernelTable& avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(DP2S_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_table() {
  static const KernelTable* chosen = [] {
    const char* forced = std::getenv("DP2S_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
  }();
  return *chosen;
}

}  // namespace dp2s::kernels
