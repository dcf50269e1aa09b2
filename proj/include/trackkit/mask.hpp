#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trackkit {

/// Dense instance mask, row-major, one byte (0 or 1) per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);
  /// Takes ownership of `data`; throws SizeMismatch on a length mismatch and
  /// MalformedInput if any byte is not 0/1.
  BinaryMask(int height, int width, std::vector<std::uint8_t> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty_extent() const noexcept { return data_.empty(); }

  std::uint8_t at(int row, int col) const { return data_[index(row, col)]; }
  void set(int row, int col, bool value) { data_[index(row, col)] = value ? 1 : 0; }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  const std::uint8_t* raw() const noexcept { return data_.data(); }
  std::uint8_t* raw() noexcept { return data_.data(); }

  /// Number of foreground pixels (the zeroth moment).
  std::size_t area() const noexcept;
  bool any() const noexcept { return area() > 0; }

  bool same_shape(const BinaryMask& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Column-major run-length mask. Runs alternate background/foreground and
/// start with background; only the first run may be zero.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

/// Axis-aligned box with continuous coordinates; (x, y) is the top-left corner.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double center_x() const noexcept { return x + 0.5 * w; }
  double center_y() const noexcept { return y + 0.5 * h; }
  bool valid() const noexcept { return w > 0.0 && h > 0.0; }

  friend bool operator==(const Box&, const Box&) = default;
};

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

// Run-length codec ------------------------------------------------------------

RleMask encode_rle(const BinaryMask& mask);
/// Throws SumMismatch or MalformedRuns; never repairs input.
BinaryMask decode_rle(const RleMask& rle);
/// Checks the RleMask invariants without decoding.
void validate_rle(const RleMask& rle);
/// Foreground pixel count straight from the runs.
std::size_t rle_area(const RleMask& rle);

/// COCO-compatible compressed string form of the counts.
std::string rle_to_string(const RleMask& rle);
RleMask rle_from_string(std::string_view text, int height, int width);

// Geometry --------------------------------------------------------------------

/// |a ∩ b| / |a ∪ b|; 0 when both are empty. Throws SizeMismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
/// Tight bounds of the foreground. Throws EmptyMask.
Box box_from_mask(const BinaryMask& mask);
/// (M10 / M00, M01 / M00) over foreground pixels. Throws EmptyMask.
Centroid centroid(const BinaryMask& mask);

/// Nearest-neighbour inverse warp by a pure translation. Source lookups are
/// rounded half-up; reads outside the image are background.
BinaryMask translate_mask(const BinaryMask& mask, double dx, double dy);

/// Rasterises a box onto an empty mask of the given size (pixels whose centre lies inside).
BinaryMask mask_from_box(const Box& box, int height, int width);

// Morphology (3x3 square structuring element, outside of image = background) ---

BinaryMask dilate(const BinaryMask& mask, int iterations = 1);
BinaryMask erode(const BinaryMask& mask, int iterations = 1);
/// Dilate `dilate_iters` times, then erode `erode_iters` times.
BinaryMask morph_smooth(const BinaryMask& mask, int dilate_iters = 4, int erode_iters = 3);

}  // namespace trackkit
