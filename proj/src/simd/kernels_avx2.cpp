// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "trackkit/simd.hpp"

namespace trackkit::simd::detail {
namespace {

constexpr std::size_t kLanes = 32;

inline std::size_t popcount_nonzero_lanes(__m256i v) {
  const __m256i zero = _mm256_setzero_si256();
  const auto zero_mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
  return kLanes - static_cast<std::size_t>(__builtin_popcount(zero_mask));
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    count += popcount_nonzero_lanes(v);
  }
  for (; i < n; ++i) count += data[i] != 0;
  return count;
}

AndOrCounts count_and_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  AndOrCounts out;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    out.intersection += popcount_nonzero_lanes(_mm256_and_si256(va, vb));
    out.union_ += popcount_nonzero_lanes(_mm256_or_si256(va, vb));
  }
  for (; i < n; ++i) {
    out.intersection += (a[i] & b[i]) != 0;
    out.union_ += (a[i] | b[i]) != 0;
  }
  return out;
}

void or3(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c, std::uint8_t* out,
         std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                        _mm256_or_si256(_mm256_or_si256(va, vb), vc));
  }
  for (; i < n; ++i) out[i] = a[i] | b[i] | c[i];
}

void and3(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c, std::uint8_t* out,
          std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                        _mm256_and_si256(_mm256_and_si256(va, vb), vc));
  }
  for (; i < n; ++i) out[i] = a[i] & b[i] & c[i];
}

}  // namespace

const MaskKernels& avx2_kernels() noexcept {
  static const MaskKernels table{Isa::avx2, &count_nonzero, &count_and_or, &or3, &and3};
  return table;
}

}  // namespace trackkit::simd::detail
