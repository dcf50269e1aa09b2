#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trackkit/io.hpp"
#include "trackkit/metrics.hpp"

namespace trackkit {

/// Frames [start, start + length) in which an object's detections are withheld.
struct DetectionGap {
  int object = 0;
  int start = 0;
  int length = 0;
};

/// Moving rectangles/ellipses with constant integer velocities.
struct SynthConfig {
  std::string sequence_id = "synth";
  int objects = 2;
  int frames = 30;
  int height = 96;
  int width = 160;
  enum class Shape { rectangle, ellipse } shape = Shape::rectangle;
  /// Objects 0 and 1 travel on crossing diagonals instead of separate lanes.
  bool crossing = false;
  /// Maximum per-frame integer offset applied to detected masks.
  int jitter = 0;
  double score = 0.9;
  /// Adds an event-modality duplicate of every detection, offset by one pixel.
  bool event_duplicates = false;
  std::vector<DetectionGap> gaps;
  std::uint64_t seed = 42;
};

struct SynthSequence {
  GtSequence gt;
  DetectionSequence detections;
};

/// GT masks are exact; later objects occlude earlier ones where they overlap.
SynthSequence synthesize(const SynthConfig& cfg);

}  // namespace trackkit
