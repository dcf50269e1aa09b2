#include <algorithm>
#include <random>

#include "trackkit/error.hpp"
#include "trackkit/synth.hpp"

namespace trackkit {
namespace {

struct Mover {
  int x0, y0;  // top-left at frame 0
  int vx, vy;  // pixels per frame
  int w, h;
};

int draw(std::mt19937_64& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool inside(const Mover& m, SynthConfig::Shape shape, int r, int c, int frame) {
  const int left = m.x0 + m.vx * frame;
  const int top = m.y0 + m.vy * frame;
  if (c < left || c >= left + m.w || r < top || r >= top + m.h) return false;
  if (shape == SynthConfig::Shape::rectangle) return true;
  const double ax = 0.5 * m.w;
  const double ay = 0.5 * m.h;
  const double dx = (c + 0.5 - left - ax) / ax;
  const double dy = (r + 0.5 - top - ay) / ay;
  return dx * dx + dy * dy <= 1.0;
}

}  // namespace

SynthSequence synthesize(const SynthConfig& cfg) {
  if (cfg.objects < 0 || cfg.frames < 1 || cfg.height < 16 || cfg.width < 16) {
    throw Error(ErrorCode::ConfigViolation, "synthetic sequence needs >= 1 frame and at least 16x16 pixels");
  }
  if (cfg.objects > 0 && cfg.height / cfg.objects < 8) {
    throw Error(ErrorCode::ConfigViolation, "too many objects for the image height");
  }
  if (cfg.crossing && cfg.objects < 2) throw Error(ErrorCode::ConfigViolation, "crossing needs two objects");
  std::mt19937_64 rng(cfg.seed);
  const int lane = cfg.objects > 0 ? cfg.height / cfg.objects : cfg.height;
  const int obj_h = std::clamp(lane - 6, 2, 16);
  const int obj_w = std::min(20, cfg.width / 4);
  const int span = cfg.frames - 1;

  std::vector<Mover> movers;
  for (int k = 0; k < cfg.objects; ++k) {
    Mover m{0, k * lane + (lane - obj_h) / 2, 0, 0, obj_w, obj_h};
    int speed = draw(rng, 1, 2);
    while (speed > 0 && speed * span > cfg.width - obj_w - 2) --speed;
    const int travel = speed * span;
    const bool rightward = (rng() & 1) == 0;
    const int slack = cfg.width - obj_w - travel - 2;
    m.x0 = rightward ? 1 + draw(rng, 0, slack) : cfg.width - obj_w - 1 - draw(rng, 0, slack);
    m.vx = rightward ? speed : -speed;
    movers.push_back(m);
  }
  if (cfg.crossing) {
    const int vx = span > 0 ? std::max(0, (cfg.width - obj_w - 8) / span) : 0;
    const int vy = span > 0 ? std::max(0, (cfg.height - obj_h - 8) / span) : 0;
    movers[0] = Mover{4, 4, vx, vy, obj_w, obj_h};
    movers[1] = Mover{4, cfg.height - obj_h - 4, vx, -vy, obj_w, obj_h};
  }

  SynthSequence out;
  out.gt.id = cfg.sequence_id;
  out.gt.length = cfg.frames;
  out.detections.id = cfg.sequence_id;
  out.detections.length = cfg.frames;
  out.detections.image_size = std::make_pair(cfg.height, cfg.width);
  for (int k = 0; k < cfg.objects; ++k) {
    out.gt.instances.push_back(InstanceTrack{k + 1, 1.0, {}});
  }

  std::vector<int> labels(static_cast<std::size_t>(cfg.height) * cfg.width);
  for (int f = 0; f < cfg.frames; ++f) {
    std::fill(labels.begin(), labels.end(), 0);
    for (int k = 0; k < cfg.objects; ++k) {
      for (int r = 0; r < cfg.height; ++r) {
        for (int c = 0; c < cfg.width; ++c) {
          if (inside(movers[k], cfg.shape, r, c, f)) labels[static_cast<std::size_t>(r) * cfg.width + c] = k + 1;
        }
      }
    }
    for (int k = 0; k < cfg.objects; ++k) {
      BinaryMask mask(cfg.height, cfg.width);
      for (std::size_t i = 0; i < labels.size(); ++i) mask.raw()[i] = labels[i] == k + 1 ? 1 : 0;
      if (!mask.any()) {
        out.gt.instances[k].segmentations.emplace_back();
        continue;
      }
      out.gt.instances[k].segmentations.emplace_back(encode_rle(mask));

      // Draw jitter unconditionally so gaps do not shift the random stream.
      const int jx = draw(rng, -cfg.jitter, cfg.jitter);
      const int jy = draw(rng, -cfg.jitter, cfg.jitter);
      const bool withheld = std::any_of(cfg.gaps.begin(), cfg.gaps.end(), [&](const DetectionGap& g) {
        return g.object == k && f >= g.start && f < g.start + g.length;
      });
      if (withheld) continue;
      const BinaryMask detected = cfg.jitter > 0 ? translate_mask(mask, jx, jy) : mask;
      if (!detected.any()) continue;
      Detection d;
      d.frame_index = f;
      d.box = box_from_mask(detected);
      d.score = cfg.score;
      d.mask = encode_rle(detected);
      d.modality = Modality::frame;
      out.detections.detections.push_back(d);
      if (cfg.event_duplicates) {
        const BinaryMask shifted = translate_mask(detected, 1.0, 0.0);
        if (shifted.any()) {
          Detection e = d;
          e.box = box_from_mask(shifted);
          e.mask = encode_rle(shifted);
          e.score = std::max(0.0, cfg.score - 0.1);
          e.modality = Modality::event;
          out.detections.detections.push_back(std::move(e));
        }
      }
    }
  }
  return out;
}

}  // namespace trackkit
