#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "trackkit/error.hpp"
#include "trackkit/postprocess.hpp"

namespace trackkit {

void MergeConfig::validate() const {
  if (!(delta_min < delta_max)) throw Error(ErrorCode::ConfigViolation, "merge requires delta_min < delta_max");
  if (!(0.0 <= theta && theta <= 1.0)) throw Error(ErrorCode::ConfigViolation, "merge theta outside [0,1]");
}

namespace {

Tracklet join(const Tracklet& earlier, const Tracklet& later) {
  std::map<int, TrackEntry> by_frame;
  for (const TrackEntry& e : later.entries) by_frame.insert_or_assign(e.frame_index, e);
  for (const TrackEntry& e : earlier.entries) by_frame.insert_or_assign(e.frame_index, e);
  Tracklet out{earlier.id, {}};
  out.entries.reserve(by_frame.size());
  for (auto& [frame, entry] : by_frame) out.entries.push_back(std::move(entry));
  return out;
}

}  // namespace

std::vector<Tracklet> merge_tracklets(const std::vector<Tracklet>& tracklets, const MergeConfig& cfg) {
  cfg.validate();
  // Canonical order so the result does not depend on input order.
  std::vector<std::size_t> order(tracklets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tracklets[a].id < tracklets[b].id; });
  std::vector<Tracklet> sorted;
  sorted.reserve(tracklets.size());
  for (const std::size_t i : order) {
    if (!tracklets[i].entries.empty()) sorted.push_back(tracklets[i]);
  }

  struct Candidate {
    double iou;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (i == j) continue;
      const int gap = sorted[j].start() - sorted[i].end();
      if (!(cfg.delta_min < gap && gap <= cfg.delta_max)) continue;
      const double iou = box_iou(sorted[i].last_box(), sorted[j].first_box());
      if (iou >= cfg.theta) candidates.push_back({iou, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.i, a.j) < std::tie(a.iou, b.i, b.j);
  });

  std::vector<char> merged(sorted.size(), 0);
  std::vector<char> absorbed(sorted.size(), 0);
  for (const Candidate& c : candidates) {
    if (merged[c.i] || merged[c.j]) continue;
    sorted[c.i] = join(sorted[c.i], sorted[c.j]);
    merged[c.i] = merged[c.j] = 1;
    absorbed[c.j] = 1;
  }
  std::vector<Tracklet> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!absorbed[i]) out.push_back(std::move(sorted[i]));
  }
  return out;
}

Tracklet interpolate_gaps(const Tracklet& tracklet, std::vector<std::string>* warnings) {
  Tracklet out{tracklet.id, {}};
  const auto& in = tracklet.entries;
  for (std::size_t k = 0; k < in.size(); ++k) {
    out.entries.push_back(in[k]);
    if (k + 1 == in.size()) break;
    const TrackEntry& first = in[k];
    const TrackEntry& second = in[k + 1];
    const int t1 = first.frame_index;
    const int t2 = second.frame_index;
    if (t2 - t1 <= 1) continue;
    if (!first.mask || !second.mask) {
      if (warnings) {
        warnings->push_back(std::string(to_string(ErrorCode::MissingBorderMask)) + ": track " +
                            std::to_string(tracklet.id) + " gap " + std::to_string(t1) + ".." +
                            std::to_string(t2));
      }
      continue;
    }
    const BinaryMask m1 = decode_rle(*first.mask);
    const BinaryMask m2 = decode_rle(*second.mask);
    if (!m1.any() || !m2.any()) {
      if (warnings) {
        warnings->push_back(std::string(to_string(ErrorCode::EmptyMask)) + ": track " +
                            std::to_string(tracklet.id) + " gap " + std::to_string(t1) + ".." +
                            std::to_string(t2));
      }
      continue;
    }
    const Centroid c1 = centroid(m1);
    const Centroid c2 = centroid(m2);
    const double score = std::min(first.score, second.score);
    for (int t = t1 + 1; t < t2; ++t) {
      const double alpha = static_cast<double>(t - t1) / static_cast<double>(t2 - t1);
      const double cx = (1.0 - alpha) * c1.x + alpha * c2.x;
      const double cy = (1.0 - alpha) * c1.y + alpha * c2.y;
      const double dx = cx - c1.x;
      const double dy = cy - c1.y;
      const BinaryMask warped = translate_mask(m1, dx, dy);
      TrackEntry e;
      e.frame_index = t;
      e.score = score;
      e.interpolated = true;
      if (warped.any()) {
        e.box = box_from_mask(warped);
      } else {
        e.box = Box{first.box.x + dx, first.box.y + dy, first.box.w, first.box.h};
      }
      e.mask = encode_rle(warped);
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

Tracklet smooth_tracklet_masks(const Tracklet& tracklet, int dilate_iters, int erode_iters) {
  Tracklet out = tracklet;
  if (dilate_iters == 0 && erode_iters == 0) return out;
  for (TrackEntry& e : out.entries) {
    if (!e.mask) continue;
    const BinaryMask smoothed = morph_smooth(decode_rle(*e.mask), dilate_iters, erode_iters);
    if (!smoothed.any()) {
      e.mask = encode_rle(smoothed);
      continue;
    }
    e.box = box_from_mask(smoothed);
    e.mask = encode_rle(smoothed);
  }
  return out;
}

}  // namespace trackkit
