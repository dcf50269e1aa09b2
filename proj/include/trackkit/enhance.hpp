#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace trackkit {

struct GrayFrame {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // row-major

  GrayFrame() = default;
  GrayFrame(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

/// Global equalization v -> round((cdf(v) - cdf_min) / (N - cdf_min) * 255).
/// Frames with a single occupied intensity are returned unchanged.
GrayFrame hist_equalize(const GrayFrame& frame);

/// Contrast-limited adaptive equalization over a rows x cols tile grid; the
/// last tile in each direction absorbs the remainder. Throws
/// GridLargerThanImage and ConfigViolation (clip_limit <= 0, grid < 1).
GrayFrame clahe(const GrayFrame& frame, double clip_limit = 2.0, int grid_rows = 8, int grid_cols = 8);

/// Binary PGM (P5, maxval 255). Throws MalformedInput / Io.
GrayFrame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

}  // namespace trackkit
