#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackkit/detect.hpp"
#include "trackkit/events.hpp"
#include "trackkit/mask.hpp"
#include "trackkit/metrics.hpp"
#include "trackkit/track.hpp"

namespace trackkit {

using Json = nlohmann::json;

enum class RleFormat { string, array };

// RLE objects: {"size": [h, w], "counts": "<string>" | [int, ...]} -------------

Json rle_to_json(const RleMask& rle, RleFormat format = RleFormat::string);
/// `where` prefixes diagnostics. Throws MalformedInput or a codec error.
RleMask rle_from_json(const Json& j, const std::string& where = "segmentation");

// Detections ------------------------------------------------------------------

/// Detections of one sequence. Image size is needed only when a detection has
/// no segmentation and its box must be rasterized.
struct DetectionSequence {
  std::string id;
  int length = 0;
  std::optional<std::pair<int, int>> image_size;  // (h, w)
  std::vector<Detection> detections;
};

/// Accepts either a bare list of detections (one sequence named after the
/// file stem) or {"sequences": [{"id", "length"?, "image_size"?, "detections": [...]}]}.
std::vector<DetectionSequence> parse_detections(const Json& j, const std::string& default_id);
std::vector<DetectionSequence> read_detections(const std::filesystem::path& path);
Json detections_to_json(const std::vector<Detection>& dets, RleFormat format = RleFormat::string);
Json detection_sequences_to_json(const std::vector<DetectionSequence>& seqs, RleFormat format = RleFormat::string);

// GT / prediction sequences ------------------------------------------------------

std::vector<SequenceTracks> parse_sequences(const Json& j, bool with_scores);
std::vector<SequenceTracks> read_sequences(const std::filesystem::path& path, bool with_scores);
Json sequences_to_json(const std::vector<SequenceTracks>& seqs, bool with_scores, RleFormat format = RleFormat::string);

// Tracklets -------------------------------------------------------------------

Json tracklets_to_json(const std::vector<Tracklet>& tracklets, RleFormat format = RleFormat::string);
std::vector<Tracklet> parse_tracklets(const Json& j);

// Reports ---------------------------------------------------------------------

Json report_to_json(const EvalReport& report);
/// Aligned-column text table, one row per sequence plus the combined row.
std::string report_to_table(const EvalReport& report);

/// Serializes with a fixed layout so equal inputs give identical bytes.
std::string dump_json(const Json& j);
Json load_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace trackkit
