#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../support/expect_error.hpp"
#include "trackkit/enhance.hpp"

using namespace trackkit;
using testing_support::error_code_of;

namespace {

GrayFrame noise_frame(std::mt19937_64& rng, int h, int w) {
  GrayFrame f(h, w);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(rng() % 256);
  return f;
}

}  // namespace

TEST_CASE("hist_equalize") {
  SUBCASE("constant frame is a fixed point") {
    const GrayFrame f(6, 5, 77);
    CHECK(hist_equalize(f) == f);
  }
  SUBCASE("two-level frame keeps 0 and 255") {
    GrayFrame f(4, 4);
    for (std::size_t i = 8; i < 16; ++i) f.data[i] = 255;
    CHECK(hist_equalize(f) == f);
  }
  SUBCASE("normalized output CDF tracks the identity line") {
    // Quadratic gradient: dense in the dark range, sparse in the bright one.
    GrayFrame f(16, 512);
    for (int r = 0; r < f.height; ++r) {
      for (int c = 0; c < f.width; ++c) {
        const double x = static_cast<double>(c) / f.width;
        f.at(r, c) = static_cast<std::uint8_t>(255.0 * x * x);
      }
    }
    const GrayFrame out = hist_equalize(f);
    std::vector<double> hist(256, 0.0);
    for (const auto v : out.data) hist[v] += 1.0;
    const double n = static_cast<double>(out.data.size());
    const double cdf_min = hist[0];
    double cdf = 0.0;
    for (int k = 0; k < 256; ++k) {
      cdf += hist[k];
      if (hist[k] == 0.0) continue;
      CHECK(std::abs((cdf - cdf_min) / (n - cdf_min) - k / 255.0) <= 1.0 / 256.0);
    }
  }
}

TEST_CASE("clahe") {
  std::mt19937_64 rng(9);
  SUBCASE("constant frame with defaults is unchanged") {
    const GrayFrame f(64, 64, 120);
    CHECK(clahe(f) == f);
  }
  SUBCASE("one tile with an unreachable clip limit is global equalization") {
    for (int i = 0; i < 5; ++i) {
      const GrayFrame f = noise_frame(rng, 20 + i, 33);
      CHECK(clahe(f, 1e6, 1, 1) == hist_equalize(f));
    }
  }
  SUBCASE("uneven tiles are accepted") {
    const GrayFrame f = noise_frame(rng, 37, 53);
    const GrayFrame out = clahe(f, 2.0, 8, 8);
    CHECK(out.height == 37);
    CHECK(out.width == 53);
    CHECK(clahe(f, 2.0, 8, 8) == out);
  }
  SUBCASE("clipping limits the contrast stretch") {
    // Low-contrast noise in [100, 108): full equalization spreads it over the
    // whole range, a tight clip limit keeps it much narrower.
    GrayFrame f(64, 64);
    for (auto& v : f.data) v = static_cast<std::uint8_t>(100 + rng() % 8);
    const auto spread = [](const GrayFrame& g) {
      const auto [lo, hi] = std::minmax_element(g.data.begin(), g.data.end());
      return static_cast<int>(*hi) - static_cast<int>(*lo);
    };
    CHECK(spread(clahe(f, 1.0, 1, 1)) < spread(hist_equalize(f)));
  }
  SUBCASE("invalid parameters") {
    const GrayFrame f(4, 4, 1);
    CHECK(error_code_of([&] { clahe(f, 2.0, 8, 8); }) == ErrorCode::GridLargerThanImage);
    CHECK(error_code_of([&] { clahe(f, 0.0, 1, 1); }) == ErrorCode::ConfigViolation);
    CHECK(error_code_of([&] { clahe(f, 2.0, 0, 1); }) == ErrorCode::ConfigViolation);
  }
}

TEST_CASE("pgm files") {
  std::mt19937_64 rng(2);
  const GrayFrame f = noise_frame(rng, 7, 9);
  const auto p = std::filesystem::temp_directory_path() / "trackkit_unit_frame.pgm";
  write_pgm(p, f);
  CHECK(read_pgm(p) == f);
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n# comment\n2 1\n255\n" << '\x01' << '\xfe';
  }
  const GrayFrame g = read_pgm(p);
  CHECK(g.width == 2);
  CHECK(g.at(0, 1) == 254);
  {
    std::ofstream out(p, std::ios::binary);
    out << "P2\n2 1\n255\n1 2\n";
  }
  CHECK(error_code_of([&] { read_pgm(p); }) == ErrorCode::MalformedInput);
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n4 4\n255\n" << "short";
  }
  CHECK(error_code_of([&] { read_pgm(p); }) == ErrorCode::MalformedInput);
  std::filesystem::remove(p);
}
