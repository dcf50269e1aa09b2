#include "trackkit/simd.hpp"

namespace trackkit::simd::detail {
namespace {

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += data[i] != 0;
  return count;
}

AndOrCounts count_and_or(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  AndOrCounts out;
  for (std::size_t i = 0; i < n; ++i) {
    out.intersection += (a[i] & b[i]) != 0;
    out.union_ += (a[i] | b[i]) != 0;
  }
  return out;
}

void or3(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c, std::uint8_t* out,
         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] | b[i] | c[i];
}

void and3(const std::uint8_t* a, const std::uint8_t* b, const std::uint8_t* c, std::uint8_t* out,
          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & b[i] & c[i];
}

}  // namespace

const MaskKernels& scalar_kernels() noexcept {
  static const MaskKernels table{Isa::scalar, &count_nonzero, &count_and_or, &or3, &and3};
  return table;
}

}  // namespace trackkit::simd::detail
