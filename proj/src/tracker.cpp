#include <Eigen/Cholesky>
#include <algorithm>
#include <string>

#include "trackkit/assign.hpp"
#include "trackkit/error.hpp"
#include "trackkit/track.hpp"

namespace trackkit {

std::string_view to_string(MotionModel m) noexcept {
  return m == MotionModel::static_box ? "static" : "constant_velocity";
}

std::string_view to_string(TrackState s) noexcept {
  switch (s) {
    case TrackState::tentative: return "tentative";
    case TrackState::active: return "active";
    case TrackState::lost: return "lost";
    case TrackState::removed: return "removed";
  }
  return "unknown";
}

void TrackerConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigViolation, what); };
  if (!(0.0 <= track_low_thresh && track_low_thresh <= track_high_thresh && track_high_thresh <= 1.0)) {
    fail("require 0 <= track_low_thresh <= track_high_thresh <= 1");
  }
  if (!(0.0 <= new_track_thresh && new_track_thresh <= 1.0)) fail("new_track_thresh outside [0,1]");
  if (!(0.0 <= match_thresh && match_thresh <= 1.0)) fail("match_thresh outside [0,1]");
  if (track_buffer < 1) fail("track_buffer must be >= 1");
  if (min_hits < 1) fail("min_hits must be >= 1");
  const double noise_terms[] = {noise.std_weight_position,   noise.std_weight_velocity,
                                noise.init_position_factor,  noise.init_velocity_factor,
                                noise.measurement_position_factor, noise.aspect_std,
                                noise.aspect_velocity_std,   noise.aspect_measurement_std};
  for (const double v : noise_terms) {
    if (!(v > 0.0)) fail("Kalman noise terms must be positive");
  }
}

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

Vec4 to_xyah(const Box& b) { return Vec4(b.center_x(), b.center_y(), b.w / b.h, b.h); }

Mat8 transition() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

Mat48 observation() {
  Mat48 h = Mat48::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

}  // namespace

Box box_from_motion(const MotionState& state) {
  const double h = state.mean(3);
  const double w = state.mean(2) * h;
  return Box{state.mean(0) - 0.5 * w, state.mean(1) - 0.5 * h, w, h};
}

MotionState motion_initiate(const Box& box, const KalmanNoise& noise) {
  MotionState s;
  const Vec4 z = to_xyah(box);
  s.mean.head<4>() = z;
  s.mean.tail<4>().setZero();
  const double h = z(3);
  const double pos = noise.init_position_factor * noise.std_weight_position * h;
  const double vel = noise.init_velocity_factor * noise.std_weight_velocity * h;
  Vec8 std;
  std << pos, pos, noise.aspect_std, pos, vel, vel, noise.aspect_velocity_std, vel;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

Box motion_predict(Track& track, const TrackerConfig& cfg) {
  if (cfg.motion == MotionModel::static_box) {
    track.predicted_box = track.last_box;
    return track.predicted_box;
  }
  const KalmanNoise& n = cfg.noise;
  const double h = track.motion.mean(3);
  const double pos = n.std_weight_position * h;
  const double vel = n.std_weight_velocity * h;
  Vec8 std;
  std << pos, pos, n.aspect_std, pos, vel, vel, n.aspect_velocity_std, vel;
  const Mat8 q = std.array().square().matrix().asDiagonal();
  static const Mat8 f = transition();
  track.motion.mean = f * track.motion.mean;
  track.motion.covariance = f * track.motion.covariance * f.transpose() + q;
  track.predicted_box = box_from_motion(track.motion);
  return track.predicted_box;
}

void motion_update(Track& track, const Box& observed, const KalmanNoise& noise) {
  static const Mat48 hm = observation();
  const double h = track.motion.mean(3);
  const double pos = noise.measurement_position_factor * noise.std_weight_position * h;
  Vec4 std(pos, pos, noise.aspect_measurement_std, pos);
  const Mat4 r = std.array().square().matrix().asDiagonal();
  const Mat8& p = track.motion.covariance;
  const Mat4 s = hm * p * hm.transpose() + r;
  const Eigen::Matrix<double, 8, 4> pht = p * hm.transpose();
  // K = P H^T S^-1, solved through the symmetric factorization of S.
  const Eigen::Matrix<double, 8, 4> gain = s.ldlt().solve(pht.transpose()).transpose();
  const Vec4 innovation = to_xyah(observed) - hm * track.motion.mean;
  track.motion.mean += gain * innovation;
  track.motion.covariance = p - gain * s * gain.transpose();
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Tracker::apply_match(Track& track, const Detection& det, int frame_index) {
  if (cfg_.motion == MotionModel::constant_velocity) motion_update(track, det.box, cfg_.noise);
  track.last_box = det.box;
  track.hits += 1;
  track.frames_since_update = 0;
  if (track.state == TrackState::lost) track.state = TrackState::active;
  track.history.push_back(TrackEntry{frame_index, det.box, det.mask, det.score, false});
}

std::vector<TrackOutput> Tracker::step(int frame_index, const std::vector<Detection>& dets) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw Error(ErrorCode::NonMonotonicFrame, "frame " + std::to_string(frame_index) +
                                                  " after frame " + std::to_string(*last_frame_));
  }
  last_frame_ = frame_index;

  std::vector<Detection> high, low;
  for (const Detection& d : dets) {
    if (d.score >= cfg_.track_high_thresh) {
      high.push_back(d);
    } else if (d.score >= cfg_.track_low_thresh) {
      low.push_back(d);
    }
  }

  std::vector<std::size_t> pool;  // indices of live tracks
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].state == TrackState::removed) continue;
    motion_predict(tracks_[i], cfg_);
    pool.push_back(i);
  }
  std::vector<char> matched(tracks_.size(), 0);

  // Stage 1: every live track against high-confidence detections.
  std::vector<char> high_used(high.size(), 0);
  {
    std::vector<Box> boxes;
    for (const std::size_t i : pool) boxes.push_back(tracks_[i].predicted_box);
    const CostMatrix cost = fused_iou_cost(boxes, high);
    for (const auto& [r, c] : gated_assign(cost, cfg_.match_thresh)) {
      apply_match(tracks_[pool[r]], high[c], frame_index);
      matched[pool[r]] = 1;
      high_used[c] = 1;
    }
  }

  // Stage 2: remaining active tracks against low-confidence detections.
  {
    std::vector<std::size_t> rest;
    for (const std::size_t i : pool) {
      if (!matched[i] && tracks_[i].state == TrackState::active) rest.push_back(i);
    }
    std::vector<Box> boxes;
    for (const std::size_t i : rest) boxes.push_back(tracks_[i].predicted_box);
    const CostMatrix cost = iou_cost(boxes, low);
    for (const auto& [r, c] : gated_assign(cost, cfg_.match_thresh)) {
      apply_match(tracks_[rest[r]], low[c], frame_index);
      matched[rest[r]] = 1;
    }
  }

  for (const std::size_t i : pool) {
    if (matched[i]) continue;
    Track& t = tracks_[i];
    t.frames_since_update += 1;
    switch (t.state) {
      case TrackState::tentative:
        t.state = TrackState::removed;
        break;
      case TrackState::active:
        t.state = TrackState::lost;
        break;
      case TrackState::lost:
        if (t.frames_since_update > cfg_.track_buffer) t.state = TrackState::removed;
        break;
      case TrackState::removed:
        break;
    }
  }

  for (std::size_t j = 0; j < high.size(); ++j) {
    if (high_used[j] || high[j].score < cfg_.new_track_thresh) continue;
    Track t;
    t.id = next_id_++;
    t.state = TrackState::tentative;
    t.hits = 1;
    t.last_box = high[j].box;
    t.predicted_box = high[j].box;
    if (cfg_.motion == MotionModel::constant_velocity) t.motion = motion_initiate(high[j].box, cfg_.noise);
    t.history.push_back(TrackEntry{frame_index, high[j].box, high[j].mask, high[j].score, false});
    tracks_.push_back(std::move(t));
  }

  std::vector<TrackOutput> out;
  for (Track& t : tracks_) {
    if (t.state == TrackState::tentative && t.hits >= cfg_.min_hits) {
      t.state = TrackState::active;
    }
    if (t.state == TrackState::active) t.ever_active = true;
    if (t.state != TrackState::active || t.frames_since_update != 0) continue;
    const TrackEntry& e = t.history.back();
    if (e.frame_index != frame_index) continue;
    Detection d;
    d.frame_index = frame_index;
    d.box = e.box;
    d.score = e.score;
    d.mask = e.mask;
    out.push_back(TrackOutput{t.id, std::move(d)});
  }
  return out;
}

std::vector<Tracklet> Tracker::finalize() const {
  std::vector<Tracklet> out;
  for (const Track& t : tracks_) {
    if (!t.ever_active || t.history.empty()) continue;
    out.push_back(Tracklet{t.id, t.history});
  }
  return out;
}

}  // namespace trackkit
