#pragma once

#include <string>
#include <vector>

#include "trackkit/config.hpp"
#include "trackkit/io.hpp"
#include "trackkit/metrics.hpp"

namespace trackkit {

struct TrackResult {
  PredSequence predictions;
  std::vector<Tracklet> tracklets;
  std::vector<std::string> warnings;
};

/// Per-frame cross-modality NMS, tracking, tracklet merging, gap
/// interpolation and mask smoothing for one sequence.
TrackResult track_sequence(const DetectionSequence& seq, const PipelineConfig& cfg);

/// Converts refined tracklets into the submission form. Instance score is the
/// mean score over observed (non-interpolated) entries.
PredSequence tracklets_to_predictions(const std::string& id, int length, const std::vector<Tracklet>& tracklets);

}  // namespace trackkit
