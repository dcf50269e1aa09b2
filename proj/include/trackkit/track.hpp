#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "trackkit/detect.hpp"
#include "trackkit/mask.hpp"

namespace trackkit {

enum class MotionModel { constant_velocity, static_box };

std::string_view to_string(MotionModel m) noexcept;

/// Process/measurement noise of the box Kalman filter. Position and velocity
/// terms scale with the box height.
struct KalmanNoise {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  double init_position_factor = 2.0;
  double init_velocity_factor = 10.0;
  double measurement_position_factor = 1.0;
  double aspect_std = 1e-2;
  double aspect_velocity_std = 1e-5;
  double aspect_measurement_std = 1e-1;

  friend bool operator==(const KalmanNoise&, const KalmanNoise&) = default;
};

struct TrackerConfig {
  double track_high_thresh = 0.6;
  double track_low_thresh = 0.1;
  double new_track_thresh = 0.7;
  /// Cost gate: a pair is accepted when (1 - similarity) <= match_thresh.
  double match_thresh = 0.8;
  /// Step calls a lost track survives before removal (a.k.a. max_age).
  int track_buffer = 60;
  int min_hits = 3;
  MotionModel motion = MotionModel::constant_velocity;
  KalmanNoise noise;

  /// Throws ConfigViolation.
  void validate() const;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

enum class TrackState { tentative, active, lost, removed };

std::string_view to_string(TrackState s) noexcept;

struct TrackEntry {
  int frame_index = 0;
  Box box;
  std::optional<RleMask> mask;
  double score = 0.0;
  /// Entry synthesized by gap interpolation rather than observed.
  bool interpolated = false;

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

/// Kalman state over (cx, cy, aspect, h) and their per-frame velocities.
struct MotionState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Identity();
};

struct Track {
  int id = 0;
  TrackState state = TrackState::tentative;
  int hits = 0;
  int frames_since_update = 0;
  bool ever_active = false;
  MotionState motion;
  Box last_box;
  Box predicted_box;
  std::vector<TrackEntry> history;
};

/// Contiguous identity fragment exported for offline refinement.
struct Tracklet {
  int id = 0;
  std::vector<TrackEntry> entries;  // sorted by frame, non-empty

  int start() const { return entries.front().frame_index; }
  int end() const { return entries.back().frame_index; }
  const Box& first_box() const { return entries.front().box; }
  const Box& last_box() const { return entries.back().box; }
};

// Motion model ------------------------------------------------------------------

MotionState motion_initiate(const Box& box, const KalmanNoise& noise);
/// Time update by one frame; returns the predicted box. Static mode leaves the
/// state untouched and returns `track.last_box`.
Box motion_predict(Track& track, const TrackerConfig& cfg);
void motion_update(Track& track, const Box& observed, const KalmanNoise& noise);
Box box_from_motion(const MotionState& state);

// Tracker -----------------------------------------------------------------------

struct TrackOutput {
  int track_id = 0;
  Detection detection;
};

/// Per-sequence tracker: two-stage (high/low confidence) association with
/// confidence-weighted IoU costs and a tentative/active/lost lifecycle.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  /// Associates one frame. frame_index must strictly increase across calls
  /// (NonMonotonicFrame otherwise). Returns detections of active tracks.
  std::vector<TrackOutput> step(int frame_index, const std::vector<Detection>& dets);

  /// Every track that ever became active, with its full matched history.
  std::vector<Tracklet> finalize() const;

  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const TrackerConfig& config() const noexcept { return cfg_; }

 private:
  void apply_match(Track& track, const Detection& det, int frame_index);

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

}  // namespace trackkit
