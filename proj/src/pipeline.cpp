#include <algorithm>
#include <map>

#include "trackkit/error.hpp"
#include "trackkit/pipeline.hpp"

namespace trackkit {

PredSequence tracklets_to_predictions(const std::string& id, int length, const std::vector<Tracklet>& tracklets) {
  PredSequence out;
  out.id = id;
  out.length = length;
  std::vector<const Tracklet*> ordered;
  for (const Tracklet& t : tracklets) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(), [](const Tracklet* a, const Tracklet* b) { return a->id < b->id; });
  for (const Tracklet* t : ordered) {
    InstanceTrack inst;
    inst.id = t->id;
    inst.segmentations.assign(static_cast<std::size_t>(std::max(length, 0)), std::nullopt);
    double score_sum = 0.0;
    int observed = 0;
    bool any = false;
    for (const TrackEntry& e : t->entries) {
      if (e.frame_index < 0 || e.frame_index >= length || !e.mask) continue;
      inst.segmentations[e.frame_index] = e.mask;
      any = true;
      if (!e.interpolated) {
        score_sum += e.score;
        ++observed;
      }
    }
    if (!any) continue;
    inst.score = observed > 0 ? score_sum / observed : 0.0;
    out.instances.push_back(std::move(inst));
  }
  return out;
}

TrackResult track_sequence(const DetectionSequence& seq, const PipelineConfig& cfg) {
  TrackResult result;
  std::map<int, std::vector<Detection>> by_frame;
  for (const Detection& d : seq.detections) {
    if (d.frame_index < 0 || d.frame_index >= seq.length) {
      throw Error(ErrorCode::MalformedInput, "sequence '" + seq.id + "': detection frame " +
                                                 std::to_string(d.frame_index) + " outside length " +
                                                 std::to_string(seq.length));
    }
    Detection copy = d;
    if (!copy.mask) {
      if (!seq.image_size) {
        throw Error(ErrorCode::MalformedInput, "sequence '" + seq.id +
                                                   "': detection without segmentation needs image_size");
      }
      copy.mask = encode_rle(mask_from_box(copy.box, seq.image_size->first, seq.image_size->second));
    }
    by_frame[d.frame_index].push_back(std::move(copy));
  }

  Tracker tracker(cfg.tracker);
  static const std::vector<Detection> kNone;
  for (int f = 0; f < seq.length; ++f) {
    const auto it = by_frame.find(f);
    tracker.step(f, it == by_frame.end() ? kNone : nms(it->second, cfg.nms_iou));
  }

  std::vector<Tracklet> tracklets = merge_tracklets(tracker.finalize(), cfg.merge);
  for (Tracklet& t : tracklets) {
    if (cfg.postprocess.interpolate) t = interpolate_gaps(t, &result.warnings);
    t = smooth_tracklet_masks(t, cfg.postprocess.dilate_iters, cfg.postprocess.erode_iters);
  }
  result.predictions = tracklets_to_predictions(seq.id, seq.length, tracklets);
  result.tracklets = std::move(tracklets);
  return result;
}

}  // namespace trackkit
