#include <cstdlib>
#include <set>
#include <string>

#include "trackkit/config.hpp"
#include "trackkit/error.hpp"

namespace trackkit {
namespace {

[[noreturn]] void violation(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigViolation, where + ": " + what);
}

// Reads keys of one JSON object and rejects whatever was not asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) violation(path_, "expected an object");
  }

  const Json* take(const char* key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) violation(where(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const char* key, int& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number_integer()) violation(where(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) violation(where(key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) violation(path_, "unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> known_;
};

std::string enum_text(const Json* v, const std::string& where) {
  if (!v->is_string()) violation(where, "expected a string");
  return v->get<std::string>();
}

}  // namespace

void PipelineConfig::validate() const {
  tracker.validate();
  merge.validate();
  if (!(0.0 <= nms_iou && nms_iou <= 1.0)) violation("nms_iou", "must lie in [0, 1]");
  if (!(0.0 <= tta.iou_gate && tta.iou_gate <= 1.0)) violation("tta.iou_gate", "must lie in [0, 1]");
  if (!(0.0 < tta.area_ratio_lo && tta.area_ratio_lo <= tta.area_ratio_hi)) {
    violation("tta.area_ratio_bounds", "require 0 < lo <= hi");
  }
  if (denoise.window_size < 1) violation("denoise.window_size", "must be >= 1");
  if (!(denoise.tau >= 0.0)) violation("denoise.tau", "must be non-negative");
  if (voxel.bins < 1) violation("voxel.bins", "must be >= 1");
  if (!(enhance.clip_limit > 0.0)) violation("enhance.clip_limit", "must be positive");
  if (enhance.grid_rows < 1 || enhance.grid_cols < 1) violation("enhance.grid", "must be at least 1x1");
  if (postprocess.dilate_iters < 0 || postprocess.erode_iters < 0) {
    violation("postprocess", "iteration counts must be non-negative");
  }
  if (!(0.0 <= match_iou && match_iou <= 1.0)) violation("metrics.match_iou", "must lie in [0, 1]");
}

Json config_to_json(const PipelineConfig& c) {
  const auto& t = c.tracker;
  const auto& n = t.noise;
  Json j;
  j["tracker"] = {
      {"track_high_thresh", t.track_high_thresh},
      {"track_low_thresh", t.track_low_thresh},
      {"new_track_thresh", t.new_track_thresh},
      {"match_thresh", t.match_thresh},
      {"track_buffer", t.track_buffer},
      {"min_hits", t.min_hits},
      {"motion", std::string(to_string(t.motion))},
      {"noise",
       {{"std_weight_position", n.std_weight_position},
        {"std_weight_velocity", n.std_weight_velocity},
        {"init_position_factor", n.init_position_factor},
        {"init_velocity_factor", n.init_velocity_factor},
        {"measurement_position_factor", n.measurement_position_factor},
        {"aspect_std", n.aspect_std},
        {"aspect_velocity_std", n.aspect_velocity_std},
        {"aspect_measurement_std", n.aspect_measurement_std}}},
  };
  j["merge"] = {{"delta_min", c.merge.delta_min}, {"delta_max", c.merge.delta_max}, {"theta", c.merge.theta}};
  j["nms_iou"] = c.nms_iou;
  j["tta"] = {{"iou_gate", c.tta.iou_gate}, {"area_ratio_bounds", {c.tta.area_ratio_lo, c.tta.area_ratio_hi}}};
  j["denoise"] = {{"window_size", c.denoise.window_size}, {"tau", c.denoise.tau}};
  j["voxel"] = {{"bins", c.voxel.bins},
                {"polarity", c.voxel.polarity == PolarityMode::per_polarity ? "per_polarity" : "signed"}};
  const char* mode = c.enhance.mode == EnhanceMode::none ? "none" : c.enhance.mode == EnhanceMode::he ? "he" : "clahe";
  j["enhance"] = {{"mode", mode}, {"clip_limit", c.enhance.clip_limit}, {"grid", {c.enhance.grid_rows, c.enhance.grid_cols}}};
  j["postprocess"] = {{"dilate_iters", c.postprocess.dilate_iters},
                      {"erode_iters", c.postprocess.erode_iters},
                      {"interpolate", c.postprocess.interpolate}};
  j["metrics"] = {{"match_iou", c.match_iou}};
  return j;
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  Section root(j, "config");
  if (const Json* v = root.take("tracker")) {
    Section s(*v, "tracker");
    auto& t = c.tracker;
    s.number("track_high_thresh", t.track_high_thresh);
    s.number("track_low_thresh", t.track_low_thresh);
    s.number("new_track_thresh", t.new_track_thresh);
    s.number("match_thresh", t.match_thresh);
    s.integer("track_buffer", t.track_buffer);
    s.integer("min_hits", t.min_hits);
    if (const Json* m = s.take("motion")) {
      const std::string text = enum_text(m, "tracker.motion");
      if (text == "constant_velocity") {
        t.motion = MotionModel::constant_velocity;
      } else if (text == "static") {
        t.motion = MotionModel::static_box;
      } else {
        violation("tracker.motion", "expected \"constant_velocity\" or \"static\"");
      }
    }
    if (const Json* nv = s.take("noise")) {
      Section ns(*nv, "tracker.noise");
      auto& n = t.noise;
      ns.number("std_weight_position", n.std_weight_position);
      ns.number("std_weight_velocity", n.std_weight_velocity);
      ns.number("init_position_factor", n.init_position_factor);
      ns.number("init_velocity_factor", n.init_velocity_factor);
      ns.number("measurement_position_factor", n.measurement_position_factor);
      ns.number("aspect_std", n.aspect_std);
      ns.number("aspect_velocity_std", n.aspect_velocity_std);
      ns.number("aspect_measurement_std", n.aspect_measurement_std);
      ns.finish();
    }
    s.finish();
  }
  if (const Json* v = root.take("merge")) {
    Section s(*v, "merge");
    s.integer("delta_min", c.merge.delta_min);
    s.integer("delta_max", c.merge.delta_max);
    s.number("theta", c.merge.theta);
    s.finish();
  }
  root.number("nms_iou", c.nms_iou);
  if (const Json* v = root.take("tta")) {
    Section s(*v, "tta");
    s.number("iou_gate", c.tta.iou_gate);
    if (const Json* b = s.take("area_ratio_bounds")) {
      if (!b->is_array() || b->size() != 2 || !(*b)[0].is_number() || !(*b)[1].is_number()) {
        violation("tta.area_ratio_bounds", "expected [lo, hi]");
      }
      c.tta.area_ratio_lo = (*b)[0].get<double>();
      c.tta.area_ratio_hi = (*b)[1].get<double>();
    }
    s.finish();
  }
  if (const Json* v = root.take("denoise")) {
    Section s(*v, "denoise");
    if (const Json* w = s.take("window_size")) {
      if (!w->is_number_unsigned()) violation("denoise.window_size", "expected a positive integer");
      c.denoise.window_size = w->get<std::size_t>();
    }
    s.number("tau", c.denoise.tau);
    s.finish();
  }
  if (const Json* v = root.take("voxel")) {
    Section s(*v, "voxel");
    s.integer("bins", c.voxel.bins);
    if (const Json* p = s.take("polarity")) {
      const std::string text = enum_text(p, "voxel.polarity");
      if (text == "signed") {
        c.voxel.polarity = PolarityMode::signed_sum;
      } else if (text == "per_polarity") {
        c.voxel.polarity = PolarityMode::per_polarity;
      } else {
        violation("voxel.polarity", "expected \"signed\" or \"per_polarity\"");
      }
    }
    s.finish();
  }
  if (const Json* v = root.take("enhance")) {
    Section s(*v, "enhance");
    if (const Json* m = s.take("mode")) {
      const std::string text = enum_text(m, "enhance.mode");
      if (text == "none") {
        c.enhance.mode = EnhanceMode::none;
      } else if (text == "he") {
        c.enhance.mode = EnhanceMode::he;
      } else if (text == "clahe") {
        c.enhance.mode = EnhanceMode::clahe;
      } else {
        violation("enhance.mode", "expected \"none\", \"he\" or \"clahe\"");
      }
    }
    s.number("clip_limit", c.enhance.clip_limit);
    if (const Json* g = s.take("grid")) {
      if (!g->is_array() || g->size() != 2 || !(*g)[0].is_number_integer() || !(*g)[1].is_number_integer()) {
        violation("enhance.grid", "expected [rows, cols]");
      }
      c.enhance.grid_rows = (*g)[0].get<int>();
      c.enhance.grid_cols = (*g)[1].get<int>();
    }
    s.finish();
  }
  if (const Json* v = root.take("postprocess")) {
    Section s(*v, "postprocess");
    s.integer("dilate_iters", c.postprocess.dilate_iters);
    s.integer("erode_iters", c.postprocess.erode_iters);
    s.boolean("interpolate", c.postprocess.interpolate);
    s.finish();
  }
  if (const Json* v = root.take("metrics")) {
    Section s(*v, "metrics");
    s.number("match_iou", c.match_iou);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = load_json(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigViolation, e.what());
  }
  return config_from_json(j);
}

std::uint64_t resolve_seed() {
  if (const char* env = std::getenv("TRACKKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
    throw Error(ErrorCode::ConfigViolation, "TRACKKIT_SEED must be an unsigned integer");
  }
  return 42;
}

}  // namespace trackkit
