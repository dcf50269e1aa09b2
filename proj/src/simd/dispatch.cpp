#include <cstdlib>
#include <string_view>

#include "trackkit/simd.hpp"

namespace trackkit::simd {

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(TRACKKIT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const MaskKernels& kernels_for(Isa isa) noexcept {
#if defined(TRACKKIT_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_supported(Isa::avx2)) return detail::avx2_kernels();
#endif
  (void)isa;
  return detail::scalar_kernels();
}

const MaskKernels& active_kernels() noexcept {
  static const MaskKernels& selected = [] () -> const MaskKernels& {
    const char* forced = std::getenv("TRACKKIT_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return detail::scalar_kernels();
    return kernels_for(Isa::avx2);
  }();
  return selected;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace trackkit::simd
