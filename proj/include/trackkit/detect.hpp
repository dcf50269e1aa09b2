#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "trackkit/mask.hpp"

namespace trackkit {

enum class Modality { frame, event };

std::string_view to_string(Modality m) noexcept;

struct Detection {
  int frame_index = 0;
  Box box;
  double score = 0.0;
  std::optional<RleMask> mask;
  Modality modality = Modality::frame;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Standard axis-aligned IoU; 0 for disjoint or degenerate boxes.
double box_iou(const Box& a, const Box& b);

/// Greedy non-maximum suppression by descending score (ties: lower input
/// index first). A detection is dropped when its IoU with any kept detection
/// exceeds `iou_threshold`. Kept detections are returned unchanged, in
/// descending-score order.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold);

/// Test-time augmentation applied to an image of size (height, width).
struct AugTransform {
  enum class Kind { identity, horizontal_flip, scale, rotate };

  Kind kind = Kind::identity;
  /// Scale factor (> 0) or rotation angle in degrees (|angle| <= 45).
  double parameter = 0.0;
  int image_height = 0;
  int image_width = 0;

  static AugTransform identity(int h, int w) { return {Kind::identity, 0.0, h, w}; }
  static AugTransform flip(int h, int w) { return {Kind::horizontal_flip, 0.0, h, w}; }
  static AugTransform scaled(double factor, int h, int w) { return {Kind::scale, factor, h, w}; }
  static AugTransform rotated(double degrees, int h, int w) { return {Kind::rotate, degrees, h, w}; }

  /// Throws ConfigViolation when the invariants do not hold.
  void validate() const;
};

/// Maps a box from original-image coordinates into the augmented image.
Box map_box(const Box& box, const AugTransform& t);

/// Maps a box from the augmented image back to original-image coordinates.
/// Rotations use the axis-aligned hull of the rotated corners, clipped to the
/// image. Throws DegenerateResult if nothing is left after clipping.
Box inverse_map_box(const Box& box, const AugTransform& t);

struct TtaGroup {
  AugTransform transform;
  std::vector<Detection> detections;
  /// True when `detections` are already in original-image coordinates.
  bool in_original_coords = false;
};

struct TtaFusionConfig {
  double iou_gate = 0.3;
  double area_ratio_lo = 0.5;
  double area_ratio_hi = 2.0;
};

/// Fuses detections from augmented passes onto the identity (reference) pass.
/// Throws NoReferenceGroup when no group uses the identity transform.
std::vector<Detection> fuse_tta(const std::vector<TtaGroup>& groups, const TtaFusionConfig& cfg = {});

}  // namespace trackkit
