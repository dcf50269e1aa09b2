#include <cstdint>
#include <limits>
#include <string>

#include "trackkit/error.hpp"
#include "trackkit/mask.hpp"

namespace trackkit {
namespace {

// Counts from this index on are stored as differences to counts[i - 2].
// Index 3 matches the reference COCO mask API, so strings written here
// decode there and vice versa.
constexpr std::size_t kFirstDeltaIndex = 3;

std::uint64_t expected_pixels(int height, int width) {
  return static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
}

}  // namespace

void validate_rle(const RleMask& rle) {
  if (rle.height < 0 || rle.width < 0) {
    throw Error(ErrorCode::MalformedRuns, "negative RLE size");
  }
  if (rle.counts.empty()) {
    throw Error(ErrorCode::MalformedRuns, "RLE has no runs");
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    if (i > 0 && rle.counts[i] == 0) {
      throw Error(ErrorCode::MalformedRuns, "zero-length run at index " + std::to_string(i));
    }
    total += rle.counts[i];
  }
  if (total != expected_pixels(rle.height, rle.width)) {
    throw Error(ErrorCode::SumMismatch, "runs sum to " + std::to_string(total) + ", expected " +
                                            std::to_string(expected_pixels(rle.height, rle.width)));
  }
}

RleMask encode_rle(const BinaryMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  const int h = mask.height();
  const int w = mask.width();
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int col = 0; col < w; ++col) {
    for (int row = 0; row < h; ++row) {
      const std::uint8_t v = mask.at(row, col);
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask decode_rle(const RleMask& rle) {
  validate_rle(rle);
  BinaryMask mask(rle.height, rle.width);
  const auto h = static_cast<std::size_t>(rle.height);
  const auto w = static_cast<std::size_t>(rle.width);
  std::size_t pos = 0;  // column-major position
  bool foreground = false;
  for (const std::uint32_t run : rle.counts) {
    if (foreground) {
      for (std::uint32_t k = 0; k < run; ++k, ++pos) {
        const std::size_t col = pos / h;
        const std::size_t row = pos % h;
        mask.raw()[row * w + col] = 1;
      }
    } else {
      pos += run;
    }
    foreground = !foreground;
  }
  return mask;
}

std::size_t rle_area(const RleMask& rle) {
  std::size_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

std::string rle_to_string(const RleMask& rle) {
  std::string out;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    std::int64_t x = rle.counts[i];
    if (i >= kFirstDeltaIndex) x -= static_cast<std::int64_t>(rle.counts[i - 2]);
    bool more = true;
    while (more) {
      auto c = static_cast<char>(x & 0x1f);
      x >>= 5;  // arithmetic shift keeps the sign
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c = static_cast<char>(c | 0x20);
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

RleMask rle_from_string(std::string_view text, int height, int width) {
  RleMask rle{height, width, {}};
  std::size_t k = 0;
  while (k < text.size()) {
    std::int64_t x = 0;
    int shift = 0;
    bool more = true;
    while (more) {
      if (k >= text.size()) {
        throw Error(ErrorCode::TruncatedStream, "continuation bit set on final character");
      }
      const auto code = static_cast<unsigned char>(text[k]);
      if (code < 48 || code > 111) {
        throw Error(ErrorCode::BadCharacter,
                    "character code " + std::to_string(code) + " at offset " + std::to_string(k));
      }
      if (shift > 60) {
        throw Error(ErrorCode::MalformedRuns, "run value overflows at offset " + std::to_string(k));
      }
      const int c = code - 48;
      x |= static_cast<std::int64_t>(c & 0x1f) << shift;
      more = (c & 0x20) != 0;
      ++k;
      shift += 5;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << shift);
    }
    const std::size_t i = rle.counts.size();
    if (i >= kFirstDeltaIndex) x += static_cast<std::int64_t>(rle.counts[i - 2]);
    if (x < 0 || x > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::MalformedRuns, "run " + std::to_string(i) + " out of range");
    }
    rle.counts.push_back(static_cast<std::uint32_t>(x));
  }
  validate_rle(rle);
  return rle;
}

}  // namespace trackkit
