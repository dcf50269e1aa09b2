#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trackkit/error.hpp"
#include "trackkit/mask.hpp"
#include "trackkit/simd.hpp"

namespace trackkit {
namespace {

std::string shape_string(const BinaryMask& m) {
  return std::to_string(m.height()) + "x" + std::to_string(m.width());
}

// Half-up rounding keeps a fractional shift uniform across the image.
long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

}  // namespace

BinaryMask::BinaryMask(int height, int width)
    : height_(height),
      width_(width),
      data_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)), 0) {
  if (height < 0 || width < 0) throw Error(ErrorCode::SizeMismatch, "negative mask size");
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 0 || width < 0 ||
      data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::SizeMismatch, "mask data length " + std::to_string(data_.size()) +
                                             " does not match " + std::to_string(height) + "x" +
                                             std::to_string(width));
  }
  for (const std::uint8_t v : data_) {
    if (v > 1) throw Error(ErrorCode::MalformedInput, "mask value outside {0,1}");
  }
}

std::size_t BinaryMask::area() const noexcept {
  return simd::active_kernels().count_nonzero(data_.data(), data_.size());
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::SizeMismatch, shape_string(a) + " vs " + shape_string(b));
  }
  const auto counts = simd::active_kernels().count_and_or(a.raw(), b.raw(), a.size());
  if (counts.union_ == 0) return 0.0;
  return static_cast<double>(counts.intersection) / static_cast<double>(counts.union_);
}

Box box_from_mask(const BinaryMask& mask) {
  int min_row = std::numeric_limits<int>::max();
  int min_col = std::numeric_limits<int>::max();
  int max_row = -1;
  int max_col = -1;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      min_row = std::min(min_row, r);
      max_row = std::max(max_row, r);
      min_col = std::min(min_col, c);
      max_col = std::max(max_col, c);
    }
  }
  if (max_row < 0) throw Error(ErrorCode::EmptyMask, "box of an empty mask");
  return Box{static_cast<double>(min_col), static_cast<double>(min_row),
             static_cast<double>(max_col - min_col + 1), static_cast<double>(max_row - min_row + 1)};
}

Centroid centroid(const BinaryMask& mask) {
  double m00 = 0.0;
  double m10 = 0.0;
  double m01 = 0.0;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      m00 += 1.0;
      m10 += c;
      m01 += r;
    }
  }
  if (m00 == 0.0) throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
  return Centroid{m10 / m00, m01 / m00};
}

BinaryMask translate_mask(const BinaryMask& mask, double dx, double dy) {
  BinaryMask out(mask.height(), mask.width());
  for (int r = 0; r < mask.height(); ++r) {
    const long src_r = round_half_up(r - dy);
    if (src_r < 0 || src_r >= mask.height()) continue;
    for (int c = 0; c < mask.width(); ++c) {
      const long src_c = round_half_up(c - dx);
      if (src_c < 0 || src_c >= mask.width()) continue;
      if (mask.at(static_cast<int>(src_r), static_cast<int>(src_c))) out.set(r, c, true);
    }
  }
  return out;
}

BinaryMask mask_from_box(const Box& box, int height, int width) {
  BinaryMask out(height, width);
  for (int r = 0; r < height; ++r) {
    const double cy = r + 0.5;
    if (cy < box.y || cy > box.bottom()) continue;
    for (int c = 0; c < width; ++c) {
      const double cx = c + 0.5;
      if (cx >= box.x && cx <= box.right()) out.set(r, c, true);
    }
  }
  return out;
}

namespace {

using RowOp = void (*)(const std::uint8_t*, const std::uint8_t*, const std::uint8_t*, std::uint8_t*,
                       std::size_t);

// One pass of a separable 3x3 operation. The source is copied into a buffer
// padded by one background pixel on every side, so erosion clears the border.
BinaryMask separable_pass(const BinaryMask& mask, RowOp op) {
  const int h = mask.height();
  const int w = mask.width();
  if (h == 0 || w == 0) return mask;
  const auto pw = static_cast<std::size_t>(w) + 2;
  std::vector<std::uint8_t> padded(pw * (static_cast<std::size_t>(h) + 2), 0);
  for (int r = 0; r < h; ++r) {
    std::copy_n(mask.raw() + static_cast<std::size_t>(r) * w, w, padded.data() + (r + 1) * pw + 1);
  }
  // Horizontal: neighbours are at -1, 0, +1 within the padded row.
  std::vector<std::uint8_t> horizontal(pw * (static_cast<std::size_t>(h) + 2), 0);
  for (int r = 1; r <= h; ++r) {
    const std::uint8_t* row = padded.data() + r * pw;
    op(row, row + 1, row + 2, horizontal.data() + r * pw + 1, static_cast<std::size_t>(w));
  }
  BinaryMask out(h, w);
  for (int r = 0; r < h; ++r) {
    const std::uint8_t* above = horizontal.data() + r * pw + 1;
    const std::uint8_t* centre = above + pw;
    const std::uint8_t* below = centre + pw;
    op(above, centre, below, out.raw() + static_cast<std::size_t>(r) * w, static_cast<std::size_t>(w));
  }
  return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = separable_pass(out, simd::active_kernels().or3);
  return out;
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = separable_pass(out, simd::active_kernels().and3);
  return out;
}

BinaryMask morph_smooth(const BinaryMask& mask, int dilate_iters, int erode_iters) {
  return erode(dilate(mask, dilate_iters), erode_iters);
}

}  // namespace trackkit
