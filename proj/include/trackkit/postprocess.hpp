#pragma once

#include <string>
#include <vector>

#include "trackkit/track.hpp"

namespace trackkit {

struct MergeConfig {
  int delta_min = -15;
  int delta_max = 15;
  double theta = 0.1;

  /// Throws ConfigViolation.
  void validate() const;

  friend bool operator==(const MergeConfig&, const MergeConfig&) = default;
};

/// Single greedy pass over candidate pairs (i, j) with
/// delta_min < s_j - e_i <= delta_max and IoU(last box of i, first box of j) >= theta,
/// taken by descending IoU. Each tracklet joins at most one merge; the merged
/// tracklet keeps the id of i and i's entries win on overlapping frames.
std::vector<Tracklet> merge_tracklets(const std::vector<Tracklet>& tracklets, const MergeConfig& cfg = {});

/// Fills missing frames between observed entries by translating the mask at
/// the gap start along the linear path between the border centroids.
/// Gaps whose border entries lack a mask are left unfilled and reported in `warnings`.
Tracklet interpolate_gaps(const Tracklet& tracklet, std::vector<std::string>* warnings = nullptr);

/// morph_smooth on every mask; boxes follow the smoothed masks.
Tracklet smooth_tracklet_masks(const Tracklet& tracklet, int dilate_iters = 4, int erode_iters = 3);

}  // namespace trackkit
