// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "../oracles/brute_assign.hpp"
#include "../oracles/brute_metrics.hpp"
#include "../support/toy_sequences.hpp"
#include "trackkit/assign.hpp"
#include "trackkit/cli.hpp"
#include "trackkit/config.hpp"
#include "trackkit/enhance.hpp"
#include "trackkit/events.hpp"
#include "trackkit/fileutil.hpp"
#include "trackkit/io.hpp"
#include "trackkit/metrics.hpp"
#include "trackkit/pipeline.hpp"
#include "trackkit/postprocess.hpp"
#include "trackkit/synth.hpp"
#include "trackkit/track.hpp"

using namespace trackkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------------
Outcome assignment_oracle() {
  std::mt19937_64 rng(1001);
  int mismatches = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 200; ++i) {
    const std::size_t r = 1 + rng() % 7, c = 1 + rng() % 7;
    CostMatrix m(r, c);
    // Dyadic values keep every partial sum exact, so equality is meaningful.
    const bool ties = i % 2 == 0;
    for (auto& v : m.values) v = ties ? static_cast<double>(rng() % 4) : static_cast<double>(rng() % 102400) / 1024.0;
    const Assignment a = hungarian(m);
    if (a.size() != std::min(r, c) || assignment_total(m, a) != oracle::min_assignment_cost(m.values, r, c)) {
      ++mismatches;
    }
  }
  const double dt = seconds_since(t0);
  return {mismatches == 0 && dt < 1.0, fmt("200 matrices up to 7x7, %d mismatches, %.3f s (limit 1 s)", mismatches, dt)};
}

// 2 -------------------------------------------------------------------------------
Outcome rle_golden_and_roundtrip() {
  const auto t0 = Clock::now();
  BinaryMask zero(2, 2), one_px(3, 3), full(2, 2, std::vector<std::uint8_t>(4, 1));
  one_px.set(0, 0, true);
  bool golden = encode_rle(zero).counts == std::vector<std::uint32_t>{4} &&
                encode_rle(one_px).counts == std::vector<std::uint32_t>{0, 1, 8} &&
                encode_rle(full).counts == std::vector<std::uint32_t>{0, 4} &&
                decode_rle({2, 2, {4}}) == zero && decode_rle({3, 3, {0, 1, 8}}) == one_px &&
                decode_rle({2, 2, {0, 4}}) == full;
  std::mt19937_64 rng(1002);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const int h = 1 + static_cast<int>(rng() % 64), w = 1 + static_cast<int>(rng() % 64);
    const unsigned density = static_cast<unsigned>(rng() % 101);
    BinaryMask m(h, w);
    for (std::size_t k = 0; k < m.size(); ++k) m.raw()[k] = (rng() % 100) < density ? 1 : 0;
    const RleMask r = encode_rle(m);
    const RleMask via_array = rle_from_json(Json::parse(dump_json(rle_to_json(r, RleFormat::array))));
    const RleMask via_string = rle_from_json(Json::parse(dump_json(rle_to_json(r, RleFormat::string))));
    if (!(decode_rle(via_array) == m && decode_rle(via_string) == m && via_array == r && via_string == r)) ++failures;
  }
  const double dt = seconds_since(t0);
  return {golden && failures == 0 && dt < 1.0,
          fmt("golden vectors %s, 1000 masks x 2 forms, %d failures, %.3f s (limit 1 s)", golden ? "ok" : "WRONG",
              failures, dt)};
}

// 3 -------------------------------------------------------------------------------
bool distinct_gt_masks(const oracle::Sequence& s) {
  for (int f = 0; f < s.length; ++f) {
    for (std::size_t a = 0; a < s.instances.size(); ++a) {
      for (std::size_t b = a + 1; b < s.instances.size(); ++b) {
        const auto& x = s.instances[a].frames[f];
        const auto& y = s.instances[b].frames[f];
        if (x && y && *x == *y) return false;
      }
    }
  }
  return true;
}

bool has_gt_detection(const oracle::Sequence& s) {
  for (const auto& inst : s.instances) {
    for (const auto& f : inst.frames) {
      if (f) return true;
    }
  }
  return false;
}

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  int idsw_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    const toy::Case c = toy::random_case(rng, 6, 6, 5, 3);
    const SequenceTracks g = toy::to_tracks(c.gt, 6, 6), p = toy::to_tracks(c.pred, 6, 6);
    const oracle::Scores want = oracle::evaluate(c.gt, c.pred, 0.5);
    const HotaScores h = hota(g, p);
    const ClearMotScores m = clear_mot(g, p, 0.5);
    for (const double d : {h.hota - want.hota, h.deta - want.deta, h.assa - want.assa, m.mota - want.mota,
                           idf1(g, p, 0.5) - want.idf1}) {
      worst = std::max(worst, std::abs(d));
    }
    if (m.idsw != want.idsw) ++idsw_mismatch;
  }
  int relabel_failures = 0;
  for (int i = 0; i < 100; ++i) {
    toy::Case c = toy::random_case(rng, 6, 6, 5, 3);
    // Scores are 0/0 without any GT detection, so such draws are replaced.
    while (!distinct_gt_masks(c.gt) || !has_gt_detection(c.gt)) c = toy::random_case(rng, 6, 6, 5, 3);
    const SequenceTracks g = toy::to_tracks(c.gt, 6, 6), p = toy::to_tracks(toy::relabel(c.gt, rng), 6, 6);
    const HotaScores h = hota(g, p);
    const ClearMotScores m = clear_mot(g, p);
    if (!(h.hota == 1.0 && h.deta == 1.0 && h.assa == 1.0 && m.mota == 1.0 && m.idsw == 0 && idf1(g, p) == 1.0)) {
      ++relabel_failures;
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-9 && idsw_mismatch == 0 && relabel_failures == 0 && dt < 30.0,
          fmt("100 random cases: max |diff| %.2e (tol 1e-9), %d IDSW mismatches; 100 relabelings with GT present: %d not 1.0; %.2f s "
              "(limit 30 s)",
              worst, idsw_mismatch, relabel_failures, dt)};
}

// 4 -------------------------------------------------------------------------------
Outcome metric_hand_cases() {
  const auto blob = [] {
    oracle::Pixels px(64, 0);
    for (int r = 2; r < 5; ++r) {
      for (int c = 2; c < 5; ++c) px[r * 8 + c] = 1;
    }
    return px;
  }();
  oracle::Sequence gt{10, {oracle::Instance{1, {}}}};
  oracle::Sequence eight{10, {oracle::Instance{1, {}}}};
  oracle::Sequence fragments{10, {oracle::Instance{1, {}}, oracle::Instance{2, {}}}};
  for (int f = 0; f < 10; ++f) {
    gt.instances[0].frames.push_back(blob);
    eight.instances[0].frames.push_back(f < 8 ? std::optional(blob) : std::nullopt);
    fragments.instances[0].frames.push_back(f < 5 ? std::optional(blob) : std::nullopt);
    fragments.instances[1].frames.push_back(f >= 5 ? std::optional(blob) : std::nullopt);
  }
  const auto g = toy::to_tracks(gt, 8, 8);
  const double mota = clear_mot(g, toy::to_tracks(eight, 8, 8)).mota;
  const double id = idf1(g, toy::to_tracks(fragments, 8, 8));
  const double h = hota(g, toy::to_tracks(eight, 8, 8)).hota;
  // 8 of 10 matched at every alpha: DetA = 8/10, A(c) = 8 / (10 + 8 - 8), HOTA = sqrt(DetA * AssA).
  const double h_expected = std::sqrt(0.8 * 0.8);
  const bool ok = std::abs(mota - 0.8) <= 1e-9 && std::abs(id - 0.5) <= 1e-9 && std::abs(h - h_expected) <= 1e-9;
  return {ok, fmt("MOTA %.12f (0.8), IDF1 %.12f (0.5), HOTA %.12f (%.12f); tol 1e-9", mota, id, h, h_expected)};
}

// 5 -------------------------------------------------------------------------------
struct TrackScore {
  std::size_t ids = 0;
  std::int64_t idsw = 0;
  double hota = 0.0;
  bool full_interval = false;
};

TrackScore score_tracking(const SynthSequence& s, const PipelineConfig& cfg) {
  const TrackResult r = track_sequence(s.detections, cfg);
  const EvalReport rep = evaluate({s.gt}, {r.predictions}, cfg.match_iou);
  TrackScore out;
  out.ids = r.predictions.instances.size();
  out.idsw = rep.combined.clear.idsw;
  out.hota = rep.combined.hota.hota;
  out.full_interval = out.ids > 0;
  for (const auto& inst : r.predictions.instances) {
    for (const auto& seg : inst.segmentations) out.full_interval = out.full_interval && seg.has_value();
  }
  return out;
}

Outcome tracker_behaviour() {
  const auto t0 = Clock::now();
  PipelineConfig cfg;
  // Mask smoothing is a separate refinement that grows rectangles by design.
  cfg.postprocess.dilate_iters = 0;
  cfg.postprocess.erode_iters = 0;
  std::ostringstream detail;
  bool ok = true;
  for (int k = 1; k <= 4; ++k) {
    SynthConfig sc;
    sc.objects = k;
    sc.frames = 40;
    sc.seed = 500 + k;
    const TrackScore t = score_tracking(synthesize(sc), cfg);
    ok = ok && t.ids == static_cast<std::size_t>(k) && t.idsw == 0 && t.hota == 1.0;
    detail << "k=" << k << ": ids " << t.ids << ", IDSW " << t.idsw << ", HOTA " << t.hota << "; ";
  }
  // Forced 3-frame gap. Default buffer bridges it inside the tracker; a
  // buffer of one frame splits the track so merging has to rejoin it.
  for (const int buffer : {60, 1}) {
    SynthConfig sc;
    sc.objects = 2;
    sc.frames = 40;
    sc.seed = 77;
    sc.gaps = {DetectionGap{0, 15, 3}};
    PipelineConfig gap_cfg = cfg;
    gap_cfg.tracker.track_buffer = buffer;
    const SynthSequence s = synthesize(sc);
    Tracker raw(gap_cfg.tracker);
    for (int f = 0; f < s.detections.length; ++f) {
      std::vector<Detection> dets;
      for (const Detection& d : s.detections.detections) {
        if (d.frame_index == f) dets.push_back(d);
      }
      raw.step(f, dets);
    }
    const std::size_t raw_tracklets = raw.finalize().size();
    const TrackScore t = score_tracking(s, gap_cfg);
    ok = ok && t.ids == 2 && t.full_interval && t.hota >= 0.95;
    detail << "gap (buffer " << buffer << ", " << raw_tracklets << " raw tracklets): ids " << t.ids
           << ", full interval " << (t.full_interval ? "yes" : "no") << ", HOTA " << t.hota << "; ";
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 10.0;
  detail << fmt("%.2f s (limit 10 s)", dt);
  return {ok, detail.str()};
}

// 6 -------------------------------------------------------------------------------
Outcome interpolation_geometry() {
  std::mt19937_64 rng(1006);
  double worst = 0.0;
  int boundary_failures = 0;
  for (int i = 0; i < 50; ++i) {
    const int h = 48, w = 48;
    BinaryMask m1(h, w);
    const int r0 = 12 + static_cast<int>(rng() % 6), c0 = 12 + static_cast<int>(rng() % 6);
    const int bh = 3 + static_cast<int>(rng() % 6), bw = 3 + static_cast<int>(rng() % 6);
    for (int r = r0; r < r0 + bh; ++r) {
      for (int c = c0; c < c0 + bw; ++c) {
        if (rng() % 5 != 0) m1.set(r, c, true);
      }
    }
    m1.set(r0, c0, true);
    const int dx = static_cast<int>(rng() % 15) - 7, dy = static_cast<int>(rng() % 15) - 7;
    const BinaryMask m2 = translate_mask(m1, dx + 0.3 * static_cast<double>(rng() % 3), dy);
    const int t1 = static_cast<int>(rng() % 5), gap = 2 + static_cast<int>(rng() % 8), t2 = t1 + gap;
    Tracklet t{1, {TrackEntry{t1, box_from_mask(m1), encode_rle(m1), 0.9, false},
                   TrackEntry{t2, box_from_mask(m2), encode_rle(m2), 0.8, false}}};
    const Tracklet out = interpolate_gaps(t);
    const Centroid c1 = centroid(m1), c2 = centroid(m2);
    if (!(out.entries.front().mask && decode_rle(*out.entries.front().mask) == m1 && translate_mask(m1, 0, 0) == m1)) {
      ++boundary_failures;
    }
    for (const TrackEntry& e : out.entries) {
      if (!e.interpolated) continue;
      const double alpha = static_cast<double>(e.frame_index - t1) / static_cast<double>(t2 - t1);
      const Centroid c = centroid(decode_rle(*e.mask));
      const double ex = (1 - alpha) * c1.x + alpha * c2.x, ey = (1 - alpha) * c1.y + alpha * c2.y;
      worst = std::max(worst, std::hypot(c.x - ex, c.y - ey));
    }
  }
  return {worst <= 1.0 && boundary_failures == 0,
          fmt("50 gap cases: max centroid deviation %.3f px (tol 1 px), alpha=0 boundary failures %d", worst,
              boundary_failures)};
}

// 7 -------------------------------------------------------------------------------
Outcome gmm_denoising() {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool ok = true;
  double worst_rel = 0.0, worst_noise_kept = 0.0, worst_signal_lost = 0.0;
  double worst_drop = 0.0;
  bool monotone = true, selected_low = true;
  for (int trial = 0; trial < 5; ++trial) {
    std::mt19937_64 rng(2000 + trial);
    const int width = 64, height = 64;
    // Label per pixel: 0 silent, 1 signal (counts 1..3, mean 2), 2 noise (counts 40..60, mean 50).
    std::vector<int> label(width * height, 0);
    std::vector<int> count(width * height, 0);
    double signal_sum = 0, noise_sum = 0;
    int signal_px = 0, noise_px = 0;
    for (int p = 0; p < width * height; ++p) {
      const auto roll = rng() % 100;
      if (roll < 60) {
        label[p] = 1;
        count[p] = 1 + static_cast<int>(rng() % 3);
        signal_sum += count[p];
        ++signal_px;
      } else if (roll < 70) {
        label[p] = 2;
        count[p] = 40 + static_cast<int>(rng() % 21);
        noise_sum += count[p];
        ++noise_px;
      }
    }
    std::vector<std::pair<std::int64_t, int>> stamps;  // (time, pixel)
    for (int p = 0; p < width * height; ++p) {
      for (int k = 0; k < count[p]; ++k) stamps.emplace_back(static_cast<std::int64_t>(rng() % 1000000), p);
    }
    std::sort(stamps.begin(), stamps.end());
    EventStream s{width, height, {}};
    std::size_t noise_events = 0, signal_events = 0;
    for (const auto& [t, p] : stamps) {
      s.events.push_back(Event{static_cast<std::uint16_t>(p % width), static_cast<std::uint16_t>(p / width), t, 1});
      (label[p] == 2 ? noise_events : signal_events) += 1;
    }
    const EventWindow w = window_at(s, 500000, s.events.size() * 2);
    const GmmFit fit = fit_count_gmm(w, width);
    const double mean_signal = signal_sum / signal_px, mean_noise = noise_sum / noise_px;
    worst_rel = std::max({worst_rel, std::abs(fit.mu1 - mean_signal) / mean_signal,
                          std::abs(fit.mu2 - mean_noise) / mean_noise});
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i) {
      const double drop = fit.log_likelihood[i - 1] - fit.log_likelihood[i];
      worst_drop = std::max(worst_drop, drop / std::abs(fit.log_likelihood[i - 1]));
      // EM ascent holds in exact arithmetic; allow summation rounding at the fixed point.
      if (drop > 1e-12 * std::abs(fit.log_likelihood[i - 1])) monotone = false;
    }
    const double tau = PipelineConfig{}.denoise.tau;
    selected_low = selected_low && (fit.mu2 - fit.mu1) >= tau;
    std::size_t noise_kept = 0, signal_kept = 0;
    for (const Event& e : select_events(w, fit, width, tau)) {
      (label[e.y * width + e.x] == 2 ? noise_kept : signal_kept) += 1;
    }
    worst_noise_kept = std::max(worst_noise_kept, static_cast<double>(noise_kept) / noise_events);
    worst_signal_lost =
        std::max(worst_signal_lost, 1.0 - static_cast<double>(signal_kept) / static_cast<double>(signal_events));
  }
  const double dt = seconds_since(t0);
  ok = worst_rel <= 0.05 && monotone && selected_low && worst_noise_kept <= 0.01 && worst_signal_lost <= 0.01 &&
       dt < 5.0;
  detail << fmt("5 streams: mean error %.2f%% (tol 5%%), low cluster selected %s, noise kept %.2f%% (max 1%%), "
                "signal lost %.2f%% (max 1%%), LL non-decreasing %s (max relative drop %.2e, slack 1e-12), %.2f s (limit 5 s)",
                100 * worst_rel, selected_low ? "yes" : "no", 100 * worst_noise_kept, 100 * worst_signal_lost,
                monotone ? "yes" : "no", worst_drop, dt);
  return {ok, detail.str()};
}

// 8 -------------------------------------------------------------------------------
Outcome voxel_partition() {
  std::mt19937_64 rng(1008);
  const int bins = VoxelConfig{}.bins;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t t0 = static_cast<std::int64_t>(rng() % 1000000);
    const std::int64_t t1 = t0 + 1 + static_cast<std::int64_t>(rng() % 1000000);
    const std::int64_t t = t0 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(t1 - t0 + 1));
    double sum = 0.0;
    for (const auto& bw : temporal_weights(t, t0, t1, bins)) sum += bw.weight;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return {worst <= 1e-12 && bins == 10,
          fmt("10000 events: max |sum - 1| %.2e (tol 1e-12); default B = %d (expected 10)", worst, bins)};
}

// 9 -------------------------------------------------------------------------------
Outcome clahe_reduction() {
  std::mt19937_64 rng(1009);
  int mismatches = 0;
  for (int i = 0; i < 20; ++i) {
    const int h = 8 + static_cast<int>(rng() % 120), w = 8 + static_cast<int>(rng() % 120);
    GrayFrame f(h, w);
    // Mix of narrow-range and full-range frames.
    const int lo = static_cast<int>(rng() % 200), span = 1 + static_cast<int>(rng() % (256 - lo));
    for (auto& v : f.data) v = static_cast<std::uint8_t>(lo + rng() % span);
    if (!(clahe(f, 1e6, 1, 1) == hist_equalize(f))) ++mismatches;
  }
  int fixed_failures = 0;
  for (const int level : {0, 1, 128, 254, 255}) {
    const GrayFrame c(64, 64, static_cast<std::uint8_t>(level));
    if (!(hist_equalize(c) == c && clahe(c) == c && clahe(c, 1e6, 1, 1) == c)) ++fixed_failures;
  }
  return {mismatches == 0 && fixed_failures == 0,
          fmt("20 random frames: %d pixel-level mismatches; 5 constant frames: %d not fixed", mismatches,
              fixed_failures)};
}

// 10 ------------------------------------------------------------------------------
int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "trackkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (status != 0) std::fprintf(stderr, "trackkit exited %d: %s\n", status, err.str().c_str());
  return status;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "trackkit_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const std::string& f) { return (dir / f).string(); };

  // Two sequences with jitter, event duplicates, a crossing and a detection gap.
  bool ok = cli({"synth", "--id", "lanes", "--objects", "3", "--jitter", "1", "--event-duplicates", "--gap",
                 "1:10:3", "--gt", p("gt_a.json"), "--detections", p("det_a.json")}) == 0 &&
            cli({"synth", "--id", "cross", "--objects", "2", "--crossing", "--shape", "ellipse", "--gt",
                 p("gt_b.json"), "--detections", p("det_b.json")}) == 0;
  if (!ok) return {false, "synthetic input generation failed"};
  Json gt{{"sequences", Json::array()}}, det{{"sequences", Json::array()}};
  for (const char* s : {"a", "b"}) {
    gt["sequences"].push_back(load_json(p(std::string("gt_") + s + ".json"))["sequences"][0]);
    det["sequences"].push_back(load_json(p(std::string("det_") + s + ".json"))["sequences"][0]);
  }
  write_json(p("gt.json"), gt);
  write_json(p("det.json"), det);

  std::vector<std::string> outputs;
  for (const char* jobs : {"1", "4"}) {
    const std::string tag = std::string("run") + jobs;
    ok = ok &&
         cli({"--jobs", jobs, "track", "--detections", p("det.json"), "--output", p(tag + "_pred.json"), "--tracklets",
              p(tag + "_tracklets.json")}) == 0 &&
         cli({"--jobs", jobs, "evaluate", "--gt", p("gt.json"), "--pred", p(tag + "_pred.json"), "--output",
              p(tag + "_report.json")}) == 0;
  }
  int differing = 0;
  std::size_t bytes = 0;
  if (ok) {
    for (const char* f : {"_pred.json", "_tracklets.json", "_report.json"}) {
      const std::string a = read_file(p(std::string("run1") + f)), b = read_file(p(std::string("run4") + f));
      bytes += a.size();
      if (a != b) ++differing;
    }
  }
  fs::remove_all(dir);
  return {ok && differing == 0,
          fmt("2 runs (jobs 1 and 4) of track + evaluate: %d of 3 JSON outputs differ, %zu bytes compared", differing,
              bytes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"assignment oracle", assignment_oracle},
      {"RLE golden vectors and round-trip", rle_golden_and_roundtrip},
      {"metric oracle and relabel invariance", metric_oracle},
      {"metric hand cases", metric_hand_cases},
      {"tracker behaviour on synthetic sequences", tracker_behaviour},
      {"gap interpolation geometry", interpolation_geometry},
      {"GMM denoising", gmm_denoising},
      {"voxel partition of unity", voxel_partition},
      {"CLAHE reduction to global equalization", clahe_reduction},
      {"determinism of track + evaluate", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
