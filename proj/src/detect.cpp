#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <numbers>
#include <string>

#include "trackkit/assign.hpp"
#include "trackkit/detect.hpp"
#include "trackkit/error.hpp"

namespace trackkit {

std::string_view to_string(Modality m) noexcept {
  return m == Modality::event ? "event" : "frame";
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> kept;
  for (const std::size_t idx : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return box_iou(k.box, dets[idx].box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(dets[idx]);
  }
  return kept;
}

void AugTransform::validate() const {
  if (kind == Kind::scale && !(parameter > 0.0)) {
    throw Error(ErrorCode::ConfigViolation, "scale factor must be positive");
  }
  if (kind == Kind::rotate && !(std::abs(parameter) <= 45.0)) {
    throw Error(ErrorCode::ConfigViolation, "rotation angle must be within 45 degrees");
  }
  if (image_height <= 0 || image_width <= 0) {
    throw Error(ErrorCode::ConfigViolation, "augmentation needs a positive image size");
  }
}

namespace {

Box rotate_hull(const Box& box, double degrees, const AugTransform& t) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = 0.5 * t.image_width;
  const double cy = 0.5 * t.image_height;
  const std::array<std::array<double, 2>, 4> corners{{
      {box.x, box.y}, {box.right(), box.y}, {box.x, box.bottom()}, {box.right(), box.bottom()}}};
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& [px, py] : corners) {
    const double dx = px - cx;
    const double dy = py - cy;
    const double rx = cx + c * dx - s * dy;
    const double ry = cy + s * dx + c * dy;
    x0 = std::min(x0, rx);
    x1 = std::max(x1, rx);
    y0 = std::min(y0, ry);
    y1 = std::max(y1, ry);
  }
  x0 = std::clamp(x0, 0.0, static_cast<double>(t.image_width));
  x1 = std::clamp(x1, 0.0, static_cast<double>(t.image_width));
  y0 = std::clamp(y0, 0.0, static_cast<double>(t.image_height));
  y1 = std::clamp(y1, 0.0, static_cast<double>(t.image_height));
  if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) {
    throw Error(ErrorCode::DegenerateResult, "rotated box clipped away");
  }
  return Box{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

Box map_box(const Box& box, const AugTransform& t) {
  switch (t.kind) {
    case AugTransform::Kind::identity:
      return box;
    case AugTransform::Kind::horizontal_flip:
      return Box{t.image_width - box.x - box.w, box.y, box.w, box.h};
    case AugTransform::Kind::scale:
      return Box{box.x * t.parameter, box.y * t.parameter, box.w * t.parameter, box.h * t.parameter};
    case AugTransform::Kind::rotate:
      return rotate_hull(box, t.parameter, t);
  }
  return box;
}

Box inverse_map_box(const Box& box, const AugTransform& t) {
  Box out = box;
  switch (t.kind) {
    case AugTransform::Kind::identity:
      break;
    case AugTransform::Kind::horizontal_flip:
      out = Box{t.image_width - box.x - box.w, box.y, box.w, box.h};
      break;
    case AugTransform::Kind::scale:
      out = Box{box.x / t.parameter, box.y / t.parameter, box.w / t.parameter, box.h / t.parameter};
      break;
    case AugTransform::Kind::rotate:
      out = rotate_hull(box, -t.parameter, t);
      break;
  }
  if (!out.valid()) throw Error(ErrorCode::DegenerateResult, "inverse-mapped box is empty");
  return out;
}

std::vector<Detection> fuse_tta(const std::vector<TtaGroup>& groups, const TtaFusionConfig& cfg) {
  const auto ref_it = std::find_if(groups.begin(), groups.end(), [](const TtaGroup& g) {
    return g.transform.kind == AugTransform::Kind::identity;
  });
  if (ref_it == groups.end()) throw Error(ErrorCode::NoReferenceGroup, "no identity group");
  const std::vector<Detection>& ref = ref_it->detections;

  struct Accumulator {
    std::array<double, 4> weighted{};  // x, y, w, h
    std::array<double, 4> plain{};
    double weight = 0.0;
    double max_score = 0.0;
    int members = 0;

    void add(const Box& b, double score) {
      const std::array<double, 4> v{b.x, b.y, b.w, b.h};
      for (std::size_t k = 0; k < 4; ++k) {
        weighted[k] += score * v[k];
        plain[k] += v[k];
      }
      weight += score;
      max_score = std::max(max_score, score);
      ++members;
    }
  };
  std::vector<Accumulator> acc(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) acc[i].add(ref[i].box, ref[i].score);

  for (auto g = groups.begin(); g != groups.end(); ++g) {
    if (g == ref_it) continue;
    std::vector<Box> mapped;
    std::vector<double> scores;
    for (const Detection& d : g->detections) {
      try {
        mapped.push_back(g->in_original_coords ? d.box : inverse_map_box(d.box, g->transform));
        scores.push_back(d.score);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateResult) throw;
      }
    }
    if (mapped.empty() || ref.empty()) continue;
    CostMatrix sim(ref.size(), mapped.size(), Orientation::maximize_similarity);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      for (std::size_t j = 0; j < mapped.size(); ++j) sim(i, j) = box_iou(ref[i].box, mapped[j]);
    }
    for (const auto& [i, j] : hungarian(sim)) {
      if (!(sim(i, j) > cfg.iou_gate)) continue;
      const double ratio = mapped[j].area() / ref[i].box.area();
      if (ratio < cfg.area_ratio_lo || ratio > cfg.area_ratio_hi) continue;
      acc[i].add(mapped[j], scores[j]);
    }
  }

  std::vector<Detection> out = ref;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (acc[i].members == 1) continue;
    const bool weighted = acc[i].weight > 0.0;
    const double denom = weighted ? acc[i].weight : static_cast<double>(acc[i].members);
    const auto& sums = weighted ? acc[i].weighted : acc[i].plain;
    out[i].box = Box{sums[0] / denom, sums[1] / denom, sums[2] / denom, sums[3] / denom};
    out[i].score = acc[i].max_score;
  }
  return out;
}

}  // namespace trackkit
