#pragma once

#include <cstdint>
#include <filesystem>

#include "trackkit/detect.hpp"
#include "trackkit/events.hpp"
#include "trackkit/io.hpp"
#include "trackkit/postprocess.hpp"
#include "trackkit/track.hpp"

namespace trackkit {

enum class EnhanceMode { none, he, clahe };

struct DenoiseConfig {
  std::size_t window_size = 30000;
  double tau = 2.5;
  friend bool operator==(const DenoiseConfig&, const DenoiseConfig&) = default;
};

struct VoxelConfig {
  int bins = 10;
  PolarityMode polarity = PolarityMode::signed_sum;
  friend bool operator==(const VoxelConfig&, const VoxelConfig&) = default;
};

struct EnhanceConfig {
  EnhanceMode mode = EnhanceMode::clahe;
  double clip_limit = 2.0;
  int grid_rows = 8;
  int grid_cols = 8;
  friend bool operator==(const EnhanceConfig&, const EnhanceConfig&) = default;
};

struct SmoothConfig {
  int dilate_iters = 4;
  int erode_iters = 3;
  bool interpolate = true;
  friend bool operator==(const SmoothConfig&, const SmoothConfig&) = default;
};

struct PipelineConfig {
  TrackerConfig tracker;
  MergeConfig merge;
  double nms_iou = 0.5;
  TtaFusionConfig tta;
  DenoiseConfig denoise;
  VoxelConfig voxel;
  EnhanceConfig enhance;
  SmoothConfig postprocess;
  double match_iou = 0.5;

  /// Throws ConfigViolation.
  void validate() const;

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    return a.tracker == b.tracker && a.merge == b.merge && a.nms_iou == b.nms_iou &&
           a.tta.iou_gate == b.tta.iou_gate && a.tta.area_ratio_lo == b.tta.area_ratio_lo &&
           a.tta.area_ratio_hi == b.tta.area_ratio_hi && a.denoise == b.denoise && a.voxel == b.voxel &&
           a.enhance == b.enhance && a.postprocess == b.postprocess && a.match_iou == b.match_iou;
  }
};

Json config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types are rejected
/// with ConfigViolation.
PipelineConfig config_from_json(const Json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Default seed 42 unless TRACKKIT_SEED is set.
std::uint64_t resolve_seed();

}  // namespace trackkit
