#include <doctest.h>

#include <random>

#include "trackkit/simd.hpp"

using namespace trackkit::simd;

namespace {

std::vector<std::uint8_t> bits(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = rng() & 1;
  return v;
}

void check_equivalent(const MaskKernels& ref, const MaskKernels& fast) {
  std::mt19937_64 rng(5);
  // Lengths around the 32-byte vector width exercise every tail size.
  for (std::size_t n = 0; n < 200; ++n) {
    const auto a = bits(rng, n), b = bits(rng, n), c = bits(rng, n);
    REQUIRE(fast.count_nonzero(a.data(), n) == ref.count_nonzero(a.data(), n));
    const auto x = fast.count_and_or(a.data(), b.data(), n), y = ref.count_and_or(a.data(), b.data(), n);
    REQUIRE(x.intersection == y.intersection);
    REQUIRE(x.union_ == y.union_);
    std::vector<std::uint8_t> o1(n), o2(n);
    fast.or3(a.data(), b.data(), c.data(), o1.data(), n);
    ref.or3(a.data(), b.data(), c.data(), o2.data(), n);
    REQUIRE(o1 == o2);
    fast.and3(a.data(), b.data(), c.data(), o1.data(), n);
    ref.and3(a.data(), b.data(), c.data(), o2.data(), n);
    REQUIRE(o1 == o2);
  }
}

}  // namespace

TEST_CASE("scalar kernels agree with direct loops") {
  const MaskKernels& k = kernels_for(Isa::scalar);
  const std::vector<std::uint8_t> a{1, 0, 1, 1}, b{0, 0, 1, 0}, c{0, 1, 1, 0};
  CHECK(k.count_nonzero(a.data(), a.size()) == 3);
  const auto ao = k.count_and_or(a.data(), b.data(), 4);
  CHECK(ao.intersection == 1);
  CHECK(ao.union_ == 3);
  std::vector<std::uint8_t> out(4);
  k.or3(a.data(), b.data(), c.data(), out.data(), 4);
  CHECK(out == std::vector<std::uint8_t>{1, 1, 1, 1});
  k.and3(a.data(), b.data(), c.data(), out.data(), 4);
  CHECK(out == std::vector<std::uint8_t>{0, 0, 1, 0});
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("avx2 not available on this CPU; skipped");
    return;
  }
  CHECK(kernels_for(Isa::avx2).isa == Isa::avx2);
  check_equivalent(kernels_for(Isa::scalar), kernels_for(Isa::avx2));
}

TEST_CASE("active kernels match the scalar reference") {
  MESSAGE("active isa: " << isa_name(active_kernels().isa));
  check_equivalent(kernels_for(Isa::scalar), active_kernels());
}
