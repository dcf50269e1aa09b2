#pragma once

// Random toy tracking cases shared by unit and acceptance tests.

#include <random>

#include "../oracles/brute_metrics.hpp"
#include "trackkit/metrics.hpp"

namespace toy {

inline trackkit::SequenceTracks to_tracks(const oracle::Sequence& s, int h, int w, const std::string& id = "toy") {
  trackkit::SequenceTracks out;
  out.id = id;
  out.length = s.length;
  for (const auto& inst : s.instances) {
    trackkit::InstanceTrack t;
    t.id = inst.id;
    for (const auto& f : inst.frames) {
      if (f) {
        t.segmentations.emplace_back(trackkit::encode_rle(trackkit::BinaryMask(h, w, *f)));
      } else {
        t.segmentations.emplace_back();
      }
    }
    out.instances.push_back(std::move(t));
  }
  return out;
}

inline oracle::Pixels random_blob(std::mt19937_64& rng, int h, int w) {
  oracle::Pixels px(static_cast<std::size_t>(h) * w, 0);
  const int r0 = static_cast<int>(rng() % h), c0 = static_cast<int>(rng() % w);
  const int r1 = r0 + static_cast<int>(rng() % (h - r0)), c1 = c0 + static_cast<int>(rng() % (w - c0));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) px[static_cast<std::size_t>(r) * w + c] = 1;
  }
  return px;
}

/// Flips a few pixels so that IoUs spread across the alpha range.
inline oracle::Pixels perturb(std::mt19937_64& rng, oracle::Pixels px) {
  const int flips = static_cast<int>(rng() % 6);
  for (int i = 0; i < flips; ++i) px[rng() % px.size()] ^= 1;
  return px;
}

struct Case {
  oracle::Sequence gt, pred;
};

/// Up to `max_frames` frames and `max_ids` ids on each side. Predictions mix
/// perturbed GT masks (with id swaps and drops) and unrelated blobs.
inline Case random_case(std::mt19937_64& rng, int h, int w, int max_frames = 5, int max_ids = 3) {
  Case c;
  const int length = 1 + static_cast<int>(rng() % max_frames);
  c.gt.length = c.pred.length = length;
  const int n_gt = 1 + static_cast<int>(rng() % max_ids);
  const int n_pred = 1 + static_cast<int>(rng() % max_ids);
  for (int g = 0; g < n_gt; ++g) {
    oracle::Instance inst{g + 1, {}};
    for (int f = 0; f < length; ++f) {
      if (rng() % 5 == 0) {
        inst.frames.emplace_back();
      } else {
        inst.frames.emplace_back(random_blob(rng, h, w));
      }
    }
    c.gt.instances.push_back(std::move(inst));
  }
  for (int p = 0; p < n_pred; ++p) {
    oracle::Instance inst{10 + p, {}};
    for (int f = 0; f < length; ++f) {
      const auto roll = rng() % 6;
      const auto& src = c.gt.instances[rng() % n_gt].frames[f];
      if (roll == 0) {
        inst.frames.emplace_back();
      } else if (roll == 1 || !src) {
        inst.frames.emplace_back(random_blob(rng, h, w));
      } else {
        inst.frames.emplace_back(perturb(rng, *src));
      }
    }
    c.pred.instances.push_back(std::move(inst));
  }
  return c;
}

/// The same masks under new, permuted ids.
inline oracle::Sequence relabel(const oracle::Sequence& s, std::mt19937_64& rng) {
  oracle::Sequence out = s;
  std::vector<int> ids;
  for (std::size_t i = 0; i < s.instances.size(); ++i) ids.push_back(100 + static_cast<int>(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  for (std::size_t i = 0; i < out.instances.size(); ++i) out.instances[i].id = ids[i];
  return out;
}

}  // namespace toy
