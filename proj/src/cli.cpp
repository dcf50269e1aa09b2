#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "trackkit/cli.hpp"
#include "trackkit/config.hpp"
#include "trackkit/enhance.hpp"
#include "trackkit/error.hpp"
#include "trackkit/events.hpp"
#include "trackkit/fileutil.hpp"
#include "trackkit/io.hpp"
#include "trackkit/metrics.hpp"
#include "trackkit/pipeline.hpp"
#include "trackkit/synth.hpp"

namespace trackkit {
namespace {

namespace fs = std::filesystem;

// Runs fn(0..n-1) on up to `jobs` threads. The lowest-index failure is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            failures[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigViolation:
      return kExitConfigViolation;
    case ErrorCode::UnknownSequenceId:
      return kExitUnknownSequence;
    default:
      return kExitMalformedInput;
  }
}

std::vector<std::int64_t> read_frame_times(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::int64_t> times;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long t = 0;
    std::string rest;
    if (!(fields >> t) || (fields >> rest)) {
      throw Error(ErrorCode::MalformedInput,
                  path.string() + ": line " + std::to_string(lineno) + ": expected one integer timestamp");
    }
    times.push_back(t);
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": frame times must be non-decreasing");
  }
  return times;
}

struct Options {
  std::string config_path;
  int jobs = 1;
  bool print_config = false;
  std::string rle_format = "string";
};

struct TrackArgs {
  std::string detections, output, tracklets;
};
struct EvaluateArgs {
  std::string gt, pred, output;
};
struct DenoiseArgs {
  std::string events, frame_times, output;
  int width = 0, height = 0;
};
struct VoxelizeArgs {
  std::string events, output, frame_times;
  int width = 0, height = 0;
  std::optional<std::int64_t> t_start, t_end;
};
struct EnhanceArgs {
  std::string input, output;
};
struct SynthArgs {
  SynthConfig cfg;
  std::string shape = "rectangle";
  std::vector<std::string> gaps;
  std::string gt, detections;
};

int cmd_track(const TrackArgs& a, const PipelineConfig& cfg, const Options& o, std::ostream& err) {
  const RleFormat fmt = o.rle_format == "array" ? RleFormat::array : RleFormat::string;
  const std::vector<DetectionSequence> seqs = read_detections(a.detections);
  std::vector<TrackResult> results(seqs.size());
  parallel_for(seqs.size(), o.jobs, [&](std::size_t i) { results[i] = track_sequence(seqs[i], cfg); });
  std::vector<PredSequence> preds;
  Json tracklets = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const std::string& w : results[i].warnings) err << "warning: " << seqs[i].id << ": " << w << "\n";
    preds.push_back(results[i].predictions);
    tracklets.push_back(Json{{"id", seqs[i].id}, {"tracklets", tracklets_to_json(results[i].tracklets, fmt)}});
  }
  write_json(a.output, sequences_to_json(preds, true, fmt));
  if (!a.tracklets.empty()) write_json(a.tracklets, Json{{"sequences", tracklets}});
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, const PipelineConfig& cfg, const Options& o, std::ostream& out,
                 std::ostream& err) {
  const auto gts = read_sequences(a.gt, false);
  const auto preds = read_sequences(a.pred, true);
  const EvalReport report = evaluate(gts, preds, cfg.match_iou, o.jobs);
  for (const std::string& w : report.warnings) err << "warning: " << w << "\n";
  out << report_to_table(report);
  if (!a.output.empty()) write_json(a.output, report_to_json(report));
  return kExitOk;
}

int cmd_denoise(const DenoiseArgs& a, const PipelineConfig& cfg, std::ostream& err) {
  const EventStream stream = read_events(a.events, a.width, a.height);
  const std::vector<std::int64_t> times = read_frame_times(a.frame_times);
  std::vector<bool> keep(stream.events.size(), false);
  GmmOptions opts;
  opts.seed = resolve_seed();
  for (const std::int64_t t : times) {
    const EventWindow window = window_at(stream, t, cfg.denoise.window_size);
    if (window.truncated) err << "warning: window at t=" << t << " clipped to " << window.size() << " events\n";
    const GmmFit fit = fit_count_gmm(window, stream.width, opts);
    const std::vector<Event> kept = select_events(window, fit, stream.width, cfg.denoise.tau);
    // Kept events form a subsequence of the window; map them back to stream indices.
    std::size_t k = 0;
    for (std::size_t i = 0; i < window.size() && k < kept.size(); ++i) {
      if (window.events[i] == kept[k]) {
        keep[window.offset + i] = true;
        ++k;
      }
    }
  }
  EventStream filtered{stream.width, stream.height, {}};
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) filtered.events.push_back(stream.events[i]);
  }
  write_events(a.output, filtered);
  return kExitOk;
}

int cmd_voxelize(const VoxelizeArgs& a, const PipelineConfig& cfg) {
  const EventStream stream = read_events(a.events, a.width, a.height);
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  if (!a.frame_times.empty()) {
    const auto times = read_frame_times(a.frame_times);
    for (std::size_t i = 0; i + 1 < times.size(); ++i) ranges.emplace_back(times[i], times[i + 1]);
    if (ranges.empty()) throw Error(ErrorCode::MalformedInput, a.frame_times + ": need at least two frame times");
  } else {
    if (stream.events.empty() && (!a.t_start || !a.t_end)) {
      throw Error(ErrorCode::EmptyStream, "no events and no explicit time range");
    }
    const std::int64_t t0 = a.t_start.value_or(stream.events.empty() ? 0 : stream.events.front().t);
    const std::int64_t t1 = a.t_end.value_or(stream.events.empty() ? 0 : stream.events.back().t + 1);
    ranges.emplace_back(t0, t1);
  }
  std::string bytes;
  Json grids = Json::array();
  int channels = 1;
  for (const auto& [t0, t1] : ranges) {
    const VoxelGrid g = voxelize(stream.events, stream.height, stream.width, cfg.voxel.bins, t0, t1, cfg.voxel.polarity);
    channels = g.channels;
    bytes.append(reinterpret_cast<const char*>(g.values.data()), g.values.size() * sizeof(float));
    grids.push_back(Json{{"t_start", t0}, {"t_end", t1}});
  }
  Json sidecar{{"H", stream.height},
               {"W", stream.width},
               {"B", cfg.voxel.bins},
               {"C", channels},
               {"t_start", ranges.front().first},
               {"t_end", ranges.back().second},
               {"dtype", "float32"},
               {"layout", "grid,channel,bin,row,col"},
               {"grids", grids}};
  write_file_atomic(a.output, bytes);
  write_json(a.output + ".json", sidecar);
  return kExitOk;
}

void enhance_file(const fs::path& in, const fs::path& out, const EnhanceConfig& e) {
  if (e.mode == EnhanceMode::none) {
    read_pgm(in);  // still rejects malformed input
    write_file_atomic(out, read_file(in));
    return;
  }
  const GrayFrame frame = read_pgm(in);
  write_pgm(out, e.mode == EnhanceMode::he ? hist_equalize(frame) : clahe(frame, e.clip_limit, e.grid_rows, e.grid_cols));
}

int cmd_enhance(const EnhanceArgs& a, const PipelineConfig& cfg, const Options& o) {
  const fs::path in(a.input);
  const fs::path out(a.output);
  if (!fs::is_directory(in)) {
    enhance_file(in, out, cfg.enhance);
    return kExitOk;
  }
  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(in)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  fs::create_directories(out);
  parallel_for(frames.size(), o.jobs,
               [&](std::size_t i) { enhance_file(frames[i], out / frames[i].filename(), cfg.enhance); });
  return kExitOk;
}

DetectionGap parse_gap(const std::string& text) {
  DetectionGap g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  std::string rest;
  if (!(in >> g.object >> c1 >> g.start >> c2 >> g.length) || c1 != ':' || c2 != ':' || (in >> rest)) {
    throw Error(ErrorCode::ConfigViolation, "gap '" + text + "': expected object:start:length");
  }
  return g;
}

int cmd_synth(SynthArgs a, const Options& o) {
  const RleFormat fmt = o.rle_format == "array" ? RleFormat::array : RleFormat::string;
  a.cfg.shape = a.shape == "ellipse" ? SynthConfig::Shape::ellipse : SynthConfig::Shape::rectangle;
  for (const std::string& g : a.gaps) a.cfg.gaps.push_back(parse_gap(g));
  a.cfg.seed = resolve_seed();
  const SynthSequence s = synthesize(a.cfg);
  write_json(a.gt, sequences_to_json({s.gt}, false, fmt));
  write_json(a.detections, detection_sequences_to_json({s.detections}, fmt));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event/frame multi-object segmentation tracking toolkit", "trackkit"};
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "Pipeline configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--jobs", o.jobs, "Maximum parallel sequences")->check(CLI::PositiveNumber);
  app.add_flag("--print-config", o.print_config, "Print the effective configuration and exit");
  app.add_option("--rle-format", o.rle_format, "RLE counts form in written JSON")
      ->check(CLI::IsMember({"string", "array"}));

  TrackArgs track;
  auto* track_cmd = app.add_subcommand("track", "Detections to tracked predictions");
  track_cmd->add_option("--detections", track.detections, "Detections JSON")->required()->check(CLI::ExistingFile);
  track_cmd->add_option("--output", track.output, "Predictions JSON")->required();
  track_cmd->add_option("--tracklets", track.tracklets, "Optional refined tracklets JSON");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", eval.pred, "Predictions JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--output", eval.output, "Report JSON");

  DenoiseArgs den;
  auto* den_cmd = app.add_subcommand("denoise", "Filter events around frame times");
  den_cmd->add_option("--events", den.events, "Events (CSV or EVT1 binary)")->required()->check(CLI::ExistingFile);
  den_cmd->add_option("--frame-times", den.frame_times, "One timestamp per line")->required()->check(CLI::ExistingFile);
  den_cmd->add_option("--output", den.output, "Filtered events, same format")->required();
  den_cmd->add_option("--width", den.width, "Sensor width for CSV input");
  den_cmd->add_option("--height", den.height, "Sensor height for CSV input");

  VoxelizeArgs vox;
  auto* vox_cmd = app.add_subcommand("voxelize", "Events to H x W x B voxel grids");
  vox_cmd->add_option("--events", vox.events, "Events (CSV or EVT1 binary)")->required()->check(CLI::ExistingFile);
  vox_cmd->add_option("--output", vox.output, "Flat float32 output; sidecar at <output>.json")->required();
  vox_cmd->add_option("--frame-times", vox.frame_times, "One grid per consecutive pair of times")
      ->check(CLI::ExistingFile);
  vox_cmd->add_option("--t-start", vox.t_start, "Range start (default: first event)");
  vox_cmd->add_option("--t-end", vox.t_end, "Range end, inclusive (default: last event + 1)");
  vox_cmd->add_option("--width", vox.width, "Sensor width for CSV input");
  vox_cmd->add_option("--height", vox.height, "Sensor height for CSV input");

  EnhanceArgs enh;
  auto* enh_cmd = app.add_subcommand("enhance", "Contrast enhancement of PGM frames");
  enh_cmd->add_option("--input", enh.input, "PGM file or directory of .pgm frames")->required()->check(CLI::ExistingPath);
  enh_cmd->add_option("--output", enh.output, "PGM file or directory")->required();

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Synthetic sequence with ground truth");
  syn_cmd->add_option("--gt", syn.gt, "Ground-truth JSON")->required();
  syn_cmd->add_option("--detections", syn.detections, "Detections JSON")->required();
  syn_cmd->add_option("--id", syn.cfg.sequence_id, "Sequence id");
  syn_cmd->add_option("--objects", syn.cfg.objects, "Object count");
  syn_cmd->add_option("--frames", syn.cfg.frames, "Frame count");
  syn_cmd->add_option("--height", syn.cfg.height, "Image height");
  syn_cmd->add_option("--width", syn.cfg.width, "Image width");
  syn_cmd->add_option("--shape", syn.shape, "Object shape")->check(CLI::IsMember({"rectangle", "ellipse"}));
  syn_cmd->add_flag("--crossing", syn.cfg.crossing, "Objects 0 and 1 cross diagonally");
  syn_cmd->add_option("--jitter", syn.cfg.jitter, "Maximum detection offset in pixels");
  syn_cmd->add_option("--score", syn.cfg.score, "Detection score");
  syn_cmd->add_flag("--event-duplicates", syn.cfg.event_duplicates, "Add shifted event-modality detections");
  syn_cmd->add_option("--gap", syn.gaps, "Withheld detections as object:start:length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const PipelineConfig cfg = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
    if (o.print_config) {
      out << dump_json(config_to_json(cfg));
      return kExitOk;
    }
    if (track_cmd->parsed()) return cmd_track(track, cfg, o, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval, cfg, o, out, err);
    if (den_cmd->parsed()) return cmd_denoise(den, cfg, err);
    if (vox_cmd->parsed()) return cmd_voxelize(vox, cfg);
    if (enh_cmd->parsed()) return cmd_enhance(enh, cfg, o);
    if (syn_cmd->parsed()) return cmd_synth(syn, o);
    err << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformedInput;
  }
}

}  // namespace trackkit
