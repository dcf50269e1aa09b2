#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trackkit/assign.hpp"
#include "trackkit/mask.hpp"

namespace trackkit {

/// One identity over a sequence; a null entry means absent in that frame.
struct InstanceTrack {
  int id = 0;
  double score = 1.0;  // predictions only
  std::vector<std::optional<RleMask>> segmentations;
};

struct SequenceTracks {
  std::string id;
  int length = 0;
  std::vector<InstanceTrack> instances;
};

using GtSequence = SequenceTracks;
using PredSequence = SequenceTracks;

/// HOTA localization thresholds 0.05, 0.10, ..., 0.95 (k / 20).
inline constexpr int kHotaAlphaCount = 19;
double hota_alpha(int k);

/// Hungarian max-IoU matching restricted to pairs with IoU >= alpha.
/// Returns (gt index, pred index) pairs. Throws SizeMismatch.
Assignment match_frame(const std::vector<BinaryMask>& gt_masks, const std::vector<BinaryMask>& pred_masks,
                       double alpha);

/// Raw, poolable counts. Combined scores are computed from summed counts.
struct MetricCounts {
  struct PerAlpha {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t fp = 0;
    double assoc_sum = 0.0;  // sum over true positives of A(c)
  };
  std::array<PerAlpha, kHotaAlphaCount> hota{};
  // CLEAR-MOT
  std::int64_t gt_detections = 0;
  std::int64_t pred_detections = 0;
  std::int64_t mot_tp = 0;
  std::int64_t mot_fn = 0;
  std::int64_t mot_fp = 0;
  std::int64_t idsw = 0;
  // Identity
  std::int64_t idtp = 0;
  std::int64_t idfn = 0;
  std::int64_t idfp = 0;

  MetricCounts& operator+=(const MetricCounts& other);
};

struct HotaScores {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  std::array<double, kHotaAlphaCount> hota_per_alpha{};
  std::array<double, kHotaAlphaCount> deta_per_alpha{};
  std::array<double, kHotaAlphaCount> assa_per_alpha{};
};

struct ClearMotScores {
  double mota = 0.0;
  std::int64_t idsw = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tp = 0;
};

struct SequenceMetrics {
  std::string sequence_id;
  HotaScores hota;
  ClearMotScores clear;
  double idf1 = 0.0;
  MetricCounts counts;
};

struct EvalReport {
  std::vector<SequenceMetrics> sequences;
  SequenceMetrics combined;
  std::vector<std::string> warnings;
};

HotaScores hota_from_counts(const MetricCounts& c);
ClearMotScores clear_mot_from_counts(const MetricCounts& c);
double idf1_from_counts(const MetricCounts& c);

/// All counts of one sequence. Throws MalformedInput on inconsistent inputs.
MetricCounts evaluate_counts(const GtSequence& gt, const PredSequence& pred, double match_iou = 0.5,
                             std::vector<std::string>* warnings = nullptr);

HotaScores hota(const GtSequence& gt, const PredSequence& pred);
ClearMotScores clear_mot(const GtSequence& gt, const PredSequence& pred, double match_iou = 0.5);
double idf1(const GtSequence& gt, const PredSequence& pred, double match_iou = 0.5);

/// Per-sequence metrics plus pooled combined metrics. Throws UnknownSequenceId.
EvalReport evaluate(const std::vector<GtSequence>& gts, const std::vector<PredSequence>& preds,
                    double match_iou = 0.5, int jobs = 1);

}  // namespace trackkit
