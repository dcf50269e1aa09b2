#pragma once

// Byte-mask kernels with a scalar reference path and vectorized variants.
// The variant is chosen once at first use from the running CPU; setting
// TRACKKIT_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace trackkit::simd {

enum class Isa { scalar, avx2 };

struct AndOrCounts {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};

struct MaskKernels {
  Isa isa;
  // Number of non-zero bytes in [data, data + n).
  std::size_t (*count_nonzero)(const std::uint8_t* data, std::size_t n);
  // Counts of (a && b) and (a || b) over n bytes holding 0/1.
  AndOrCounts (*count_and_or)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
  // out[i] = a[i] | b[i] | c[i]
  void (*or3)(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c,
              std::uint8_t* out, std::size_t n);
  // out[i] = a[i] & b[i] & c[i]
  void (*and3)(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c,
               std::uint8_t* out, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;

/// Kernel table for a specific ISA. Requesting an unsupported ISA returns the scalar table.
const MaskKernels& kernels_for(Isa isa) noexcept;

/// Kernel table selected for this process.
const MaskKernels& active_kernels() noexcept;

std::string_view isa_name(Isa isa) noexcept;

namespace detail {
const MaskKernels& scalar_kernels() noexcept;
#if defined(TRACKKIT_HAVE_AVX2)
const MaskKernels& avx2_kernels() noexcept;
#endif
}  // namespace detail

}  // namespace trackkit::simd
