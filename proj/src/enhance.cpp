#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "trackkit/enhance.hpp"
#include "trackkit/error.hpp"
#include "trackkit/fileutil.hpp"

namespace trackkit {
namespace {

using Histogram = std::array<std::int64_t, 256>;
using Lut = std::array<std::uint8_t, 256>;

Lut identity_lut() {
  Lut lut{};
  for (int v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
  return lut;
}

// round((cdf(v) - cdf_min) / (total - cdf_min) * 255) in exact integer arithmetic.
Lut equalization_lut(const Histogram& hist) {
  std::int64_t total = 0;
  for (const auto h : hist) total += h;
  std::int64_t cdf_min = 0;
  for (const auto h : hist) {
    if (h > 0) {
      cdf_min = h;
      break;
    }
  }
  const std::int64_t denom = total - cdf_min;
  if (denom <= 0) return identity_lut();
  Lut lut{};
  std::int64_t cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v];
    const std::int64_t num = std::max<std::int64_t>(cdf - cdf_min, 0) * 255;
    lut[v] = static_cast<std::uint8_t>((2 * num + denom) / (2 * denom));
  }
  return lut;
}

int occupied_bins(const Histogram& hist) {
  return static_cast<int>(std::count_if(hist.begin(), hist.end(), [](std::int64_t h) { return h > 0; }));
}

struct Span {
  int begin;
  int end;
  double centre() const { return begin + 0.5 * (end - begin - 1); }
};

std::vector<Span> split(int extent, int parts) {
  const int base = extent / parts;
  std::vector<Span> spans;
  for (int i = 0; i < parts; ++i) spans.push_back({i * base, i + 1 == parts ? extent : (i + 1) * base});
  return spans;
}

struct Blend {
  int lo;
  int hi;
  double weight_hi;
};

Blend locate(double pos, const std::vector<Span>& spans) {
  if (pos <= spans.front().centre()) return {0, 0, 0.0};
  const int last = static_cast<int>(spans.size()) - 1;
  if (pos >= spans[last].centre()) return {last, last, 0.0};
  int i = 0;
  while (pos >= spans[i + 1].centre()) ++i;
  const double w = (pos - spans[i].centre()) / (spans[i + 1].centre() - spans[i].centre());
  return {i, i + 1, w};
}

}  // namespace

GrayFrame hist_equalize(const GrayFrame& frame) {
  Histogram hist{};
  for (const auto v : frame.data) ++hist[v];
  if (occupied_bins(hist) <= 1) return frame;
  const Lut lut = equalization_lut(hist);
  GrayFrame out = frame;
  for (auto& v : out.data) v = lut[v];
  return out;
}

GrayFrame clahe(const GrayFrame& frame, double clip_limit, int grid_rows, int grid_cols) {
  if (grid_rows < 1 || grid_cols < 1) throw Error(ErrorCode::ConfigViolation, "CLAHE grid must be at least 1x1");
  if (!(clip_limit > 0.0)) throw Error(ErrorCode::ConfigViolation, "CLAHE clip limit must be positive");
  if (grid_rows > frame.height || grid_cols > frame.width) {
    throw Error(ErrorCode::GridLargerThanImage, std::to_string(grid_rows) + "x" + std::to_string(grid_cols) +
                                                    " grid on a " + std::to_string(frame.height) + "x" +
                                                    std::to_string(frame.width) + " frame");
  }
  const auto row_spans = split(frame.height, grid_rows);
  const auto col_spans = split(frame.width, grid_cols);

  std::vector<Lut> luts(static_cast<std::size_t>(grid_rows) * grid_cols);
  for (int ti = 0; ti < grid_rows; ++ti) {
    for (int tj = 0; tj < grid_cols; ++tj) {
      Histogram hist{};
      for (int r = row_spans[ti].begin; r < row_spans[ti].end; ++r) {
        for (int c = col_spans[tj].begin; c < col_spans[tj].end; ++c) ++hist[frame.at(r, c)];
      }
      Lut& lut = luts[static_cast<std::size_t>(ti) * grid_cols + tj];
      if (occupied_bins(hist) <= 1) {
        lut = identity_lut();
        continue;
      }
      const double tile_pixels = static_cast<double>(row_spans[ti].end - row_spans[ti].begin) *
                                 static_cast<double>(col_spans[tj].end - col_spans[tj].begin);
      const double limit = std::max(1.0, std::floor(clip_limit * tile_pixels / 256.0));
      std::int64_t excess = 0;
      for (auto& h : hist) {
        if (static_cast<double>(h) > limit) {
          const auto clipped = static_cast<std::int64_t>(limit);
          excess += h - clipped;
          h = clipped;
        }
      }
      const std::int64_t uniform = excess / 256;
      const std::int64_t residual = excess % 256;
      for (int v = 0; v < 256; ++v) hist[v] += uniform + (v < residual ? 1 : 0);
      lut = equalization_lut(hist);
    }
  }

  GrayFrame out(frame.height, frame.width);
  for (int r = 0; r < frame.height; ++r) {
    const Blend by = locate(r, row_spans);
    for (int c = 0; c < frame.width; ++c) {
      const Blend bx = locate(c, col_spans);
      const std::uint8_t v = frame.at(r, c);
      auto lut_at = [&](int ti, int tj) {
        return static_cast<double>(luts[static_cast<std::size_t>(ti) * grid_cols + tj][v]);
      };
      if (by.lo == by.hi && bx.lo == bx.hi) {
        out.at(r, c) = luts[static_cast<std::size_t>(by.lo) * grid_cols + bx.lo][v];
        continue;
      }
      const double top = (1.0 - bx.weight_hi) * lut_at(by.lo, bx.lo) + bx.weight_hi * lut_at(by.lo, bx.hi);
      const double bottom = (1.0 - bx.weight_hi) * lut_at(by.hi, bx.lo) + bx.weight_hi * lut_at(by.hi, bx.hi);
      const double value = (1.0 - by.weight_hi) * top + by.weight_hi * bottom;
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return out;
}

GrayFrame read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space_and_comments();
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1 << 20) break;
      ++pos;
    }
    if (pos == start) throw Error(ErrorCode::MalformedInput, path.string() + ": bad PGM " + what);
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::MalformedInput, path.string() + ": not a binary PGM (P5)");
  }
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (maxval != 255) throw Error(ErrorCode::MalformedInput, path.string() + ": only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": truncated PGM header");
  }
  ++pos;
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < n) throw Error(ErrorCode::MalformedInput, path.string() + ": truncated PGM raster");
  GrayFrame f(static_cast<int>(height), static_cast<int>(width));
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data()) + pos, n, f.data.begin());
  return f;
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.data.data()), frame.data.size());
  write_file_atomic(path, out);
}

}  // namespace trackkit
