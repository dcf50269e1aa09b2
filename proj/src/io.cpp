#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "trackkit/error.hpp"
#include "trackkit/fileutil.hpp"
#include "trackkit/io.hpp"

namespace trackkit {
namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedInput, where + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) malformed(where, "expected a number");
  return j.get<double>();
}

long long integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) malformed(where, "expected an integer");
  return j.get<long long>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) malformed(where, "expected a string");
  return j.get<std::string>();
}

std::pair<int, int> int_pair(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) malformed(where, "expected a two-element array");
  const long long a = integer(j[0], where + "[0]");
  const long long b = integer(j[1], where + "[1]");
  if (a < 0 || b < 0 || a > (1 << 20) || b > (1 << 20)) malformed(where, "size out of range");
  return {static_cast<int>(a), static_cast<int>(b)};
}

Json box_json(const Box& b) { return Json::array({b.x, b.y, b.w, b.h}); }

Box box_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) malformed(where, "expected [x, y, w, h]");
  Box b{number(j[0], where + "[0]"), number(j[1], where + "[1]"), number(j[2], where + "[2]"),
        number(j[3], where + "[3]")};
  if (!b.valid()) malformed(where, "box width and height must be positive");
  return b;
}

Detection detection_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) malformed(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "frame" && key != "bbox" && key != "score" && key != "modality" && key != "segmentation") {
      malformed(where, "unknown field '" + key + "'");
    }
  }
  Detection d;
  const long long frame = integer(field(j, "frame", where), where + ".frame");
  if (frame < 0) malformed(where + ".frame", "must be non-negative");
  d.frame_index = static_cast<int>(frame);
  d.box = box_from_json(field(j, "bbox", where), where + ".bbox");
  d.score = number(field(j, "score", where), where + ".score");
  if (!(d.score >= 0.0 && d.score <= 1.0)) malformed(where + ".score", "must lie in [0, 1]");
  if (const auto it = j.find("modality"); it != j.end()) {
    const std::string m = text(*it, where + ".modality");
    if (m == "frame") {
      d.modality = Modality::frame;
    } else if (m == "event") {
      d.modality = Modality::event;
    } else {
      malformed(where + ".modality", "expected \"frame\" or \"event\"");
    }
  }
  if (const auto it = j.find("segmentation"); it != j.end() && !it->is_null()) {
    d.mask = rle_from_json(*it, where + ".segmentation");
  }
  return d;
}

std::string rethrow_context(const Error& e, const std::string& where) {
  return where + ": " + e.what();
}

}  // namespace

Json rle_to_json(const RleMask& rle, RleFormat format) {
  Json j;
  j["size"] = Json::array({rle.height, rle.width});
  if (format == RleFormat::string) {
    j["counts"] = rle_to_string(rle);
  } else {
    j["counts"] = rle.counts;
  }
  return j;
}

RleMask rle_from_json(const Json& j, const std::string& where) {
  const auto [h, w] = int_pair(field(j, "size", where), where + ".size");
  const Json& counts = field(j, "counts", where);
  try {
    if (counts.is_string()) return rle_from_string(counts.get<std::string>(), h, w);
    if (!counts.is_array()) malformed(where + ".counts", "expected a string or an integer array");
    RleMask rle{h, w, {}};
    rle.counts.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const long long c = integer(counts[i], where + ".counts[" + std::to_string(i) + "]");
      if (c < 0 || c > 0xffffffffLL) malformed(where + ".counts[" + std::to_string(i) + "]", "out of range");
      rle.counts.push_back(static_cast<std::uint32_t>(c));
    }
    validate_rle(rle);
    return rle;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    throw Error(e.code(), rethrow_context(e, where));
  }
}

std::vector<DetectionSequence> parse_detections(const Json& j, const std::string& default_id) {
  std::vector<DetectionSequence> out;
  auto parse_list = [](const Json& list, const std::string& where) {
    if (!list.is_array()) malformed(where, "expected an array of detections");
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < list.size(); ++i) {
      dets.push_back(detection_from_json(list[i], where + "[" + std::to_string(i) + "]"));
    }
    return dets;
  };
  auto default_length = [](const std::vector<Detection>& dets) {
    int len = 0;
    for (const auto& d : dets) len = std::max(len, d.frame_index + 1);
    return len;
  };
  if (j.is_array()) {
    DetectionSequence s;
    s.id = default_id;
    s.detections = parse_list(j, "detections");
    s.length = default_length(s.detections);
    out.push_back(std::move(s));
    return out;
  }
  const Json& seqs = field(j, "sequences", "detections");
  if (!seqs.is_array()) malformed("sequences", "expected an array");
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string where = "sequences[" + std::to_string(i) + "]";
    const Json& sj = seqs[i];
    DetectionSequence s;
    s.id = text(field(sj, "id", where), where + ".id");
    s.detections = parse_list(field(sj, "detections", where), where + ".detections");
    s.length = default_length(s.detections);
    if (const auto it = sj.find("length"); it != sj.end()) {
      const long long len = integer(*it, where + ".length");
      if (len < s.length) malformed(where + ".length", "shorter than the last detected frame");
      s.length = static_cast<int>(len);
    }
    if (const auto it = sj.find("image_size"); it != sj.end()) s.image_size = int_pair(*it, where + ".image_size");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DetectionSequence> read_detections(const std::filesystem::path& path) {
  // A zero-byte file is an empty detection list.
  const std::string bytes = read_file(path);
  if (bytes.find_first_not_of(" \t\r\n") == std::string::npos) return parse_detections(Json::array(), path.stem().string());
  return parse_detections(load_json(path), path.stem().string());
}

Json detections_to_json(const std::vector<Detection>& dets, RleFormat format) {
  Json list = Json::array();
  for (const Detection& d : dets) {
    Json j;
    j["frame"] = d.frame_index;
    j["bbox"] = box_json(d.box);
    j["score"] = d.score;
    j["modality"] = std::string(to_string(d.modality));
    if (d.mask) j["segmentation"] = rle_to_json(*d.mask, format);
    list.push_back(std::move(j));
  }
  return list;
}

Json detection_sequences_to_json(const std::vector<DetectionSequence>& seqs, RleFormat format) {
  Json list = Json::array();
  for (const auto& s : seqs) {
    Json j;
    j["id"] = s.id;
    j["length"] = s.length;
    if (s.image_size) j["image_size"] = Json::array({s.image_size->first, s.image_size->second});
    j["detections"] = detections_to_json(s.detections, format);
    list.push_back(std::move(j));
  }
  return Json{{"sequences", std::move(list)}};
}

std::vector<SequenceTracks> parse_sequences(const Json& j, bool with_scores) {
  const Json& seqs = field(j, "sequences", "document");
  if (!seqs.is_array()) malformed("sequences", "expected an array");
  std::vector<SequenceTracks> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string where = "sequences[" + std::to_string(i) + "]";
    const Json& sj = seqs[i];
    SequenceTracks s;
    s.id = text(field(sj, "id", where), where + ".id");
    const long long len = integer(field(sj, "length", where), where + ".length");
    if (len < 0) malformed(where + ".length", "must be non-negative");
    s.length = static_cast<int>(len);
    const Json& insts = field(sj, "instances", where);
    if (!insts.is_array()) malformed(where + ".instances", "expected an array");
    for (std::size_t k = 0; k < insts.size(); ++k) {
      const std::string iw = where + ".instances[" + std::to_string(k) + "]";
      const Json& ij = insts[k];
      InstanceTrack inst;
      inst.id = static_cast<int>(integer(field(ij, "id", iw), iw + ".id"));
      if (with_scores) {
        inst.score = number(field(ij, "score", iw), iw + ".score");
      } else if (const auto it = ij.find("score"); it != ij.end()) {
        inst.score = number(*it, iw + ".score");
      }
      const Json& segs = field(ij, "segmentations", iw);
      if (!segs.is_array()) malformed(iw + ".segmentations", "expected an array");
      if (static_cast<long long>(segs.size()) != len) {
        malformed(iw + ".segmentations", "has " + std::to_string(segs.size()) + " entries for length " +
                                             std::to_string(len));
      }
      for (std::size_t f = 0; f < segs.size(); ++f) {
        if (segs[f].is_null()) {
          inst.segmentations.emplace_back();
        } else {
          inst.segmentations.emplace_back(rle_from_json(segs[f], iw + ".segmentations[" + std::to_string(f) + "]"));
        }
      }
      s.instances.push_back(std::move(inst));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SequenceTracks> read_sequences(const std::filesystem::path& path, bool with_scores) {
  return parse_sequences(load_json(path), with_scores);
}

Json sequences_to_json(const std::vector<SequenceTracks>& seqs, bool with_scores, RleFormat format) {
  Json list = Json::array();
  for (const auto& s : seqs) {
    Json insts = Json::array();
    for (const auto& inst : s.instances) {
      Json ij;
      ij["id"] = inst.id;
      if (with_scores) ij["score"] = inst.score;
      Json segs = Json::array();
      for (const auto& seg : inst.segmentations) segs.push_back(seg ? rle_to_json(*seg, format) : Json(nullptr));
      ij["segmentations"] = std::move(segs);
      insts.push_back(std::move(ij));
    }
    list.push_back(Json{{"id", s.id}, {"length", s.length}, {"instances", std::move(insts)}});
  }
  return Json{{"sequences", std::move(list)}};
}

Json tracklets_to_json(const std::vector<Tracklet>& tracklets, RleFormat format) {
  Json list = Json::array();
  for (const Tracklet& t : tracklets) {
    Json entries = Json::array();
    for (const TrackEntry& e : t.entries) {
      Json ej;
      ej["frame"] = e.frame_index;
      ej["bbox"] = box_json(e.box);
      ej["score"] = e.score;
      ej["interpolated"] = e.interpolated;
      ej["segmentation"] = e.mask ? rle_to_json(*e.mask, format) : Json(nullptr);
      entries.push_back(std::move(ej));
    }
    Json tj;
    tj["id"] = t.id;
    tj["start"] = t.start();
    tj["end"] = t.end();
    tj["first_bbox"] = box_json(t.first_box());
    tj["last_bbox"] = box_json(t.last_box());
    tj["entries"] = std::move(entries);
    list.push_back(std::move(tj));
  }
  return Json{{"tracklets", std::move(list)}};
}

std::vector<Tracklet> parse_tracklets(const Json& j) {
  const Json& list = field(j, "tracklets", "document");
  if (!list.is_array()) malformed("tracklets", "expected an array");
  std::vector<Tracklet> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "tracklets[" + std::to_string(i) + "]";
    Tracklet t;
    t.id = static_cast<int>(integer(field(list[i], "id", where), where + ".id"));
    const Json& entries = field(list[i], "entries", where);
    if (!entries.is_array() || entries.empty()) malformed(where + ".entries", "expected a non-empty array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string ew = where + ".entries[" + std::to_string(k) + "]";
      const Json& ej = entries[k];
      TrackEntry e;
      e.frame_index = static_cast<int>(integer(field(ej, "frame", ew), ew + ".frame"));
      e.box = box_from_json(field(ej, "bbox", ew), ew + ".bbox");
      e.score = number(field(ej, "score", ew), ew + ".score");
      if (const auto it = ej.find("interpolated"); it != ej.end()) {
        if (!it->is_boolean()) malformed(ew + ".interpolated", "expected a boolean");
        e.interpolated = it->get<bool>();
      }
      if (const auto it = ej.find("segmentation"); it != ej.end() && !it->is_null()) {
        e.mask = rle_from_json(*it, ew + ".segmentation");
      }
      if (!t.entries.empty() && e.frame_index <= t.entries.back().frame_index) {
        malformed(ew + ".frame", "entries must be sorted by frame");
      }
      t.entries.push_back(std::move(e));
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

Json metrics_json(const SequenceMetrics& m) {
  Json j;
  j["sequence"] = m.sequence_id;
  j["HOTA"] = m.hota.hota;
  j["DetA"] = m.hota.deta;
  j["AssA"] = m.hota.assa;
  j["MOTA"] = m.clear.mota;
  j["IDF1"] = m.idf1;
  j["IDSW"] = m.clear.idsw;
  j["TP"] = m.clear.tp;
  j["FP"] = m.clear.fp;
  j["FN"] = m.clear.fn;
  j["HOTA_alpha"] = m.hota.hota_per_alpha;
  j["DetA_alpha"] = m.hota.deta_per_alpha;
  j["AssA_alpha"] = m.hota.assa_per_alpha;
  return j;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

Json report_to_json(const EvalReport& report) {
  Json seqs = Json::array();
  for (const auto& s : report.sequences) seqs.push_back(metrics_json(s));
  Json alphas = Json::array();
  for (int k = 0; k < kHotaAlphaCount; ++k) alphas.push_back(hota_alpha(k));
  return Json{{"alphas", std::move(alphas)},
              {"sequences", std::move(seqs)},
              {"combined", metrics_json(report.combined)},
              {"warnings", report.warnings}};
}

std::string report_to_table(const EvalReport& report) {
  const std::vector<std::string> header{"sequence", "HOTA", "DetA", "AssA", "MOTA", "IDF1", "IDSW", "TP", "FP", "FN"};
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const SequenceMetrics& m) {
    rows.push_back({m.sequence_id, fixed(m.hota.hota), fixed(m.hota.deta), fixed(m.hota.assa), fixed(m.clear.mota),
                    fixed(m.idf1), std::to_string(m.clear.idsw), std::to_string(m.clear.tp),
                    std::to_string(m.clear.fp), std::to_string(m.clear.fn)});
  };
  for (const auto& s : report.sequences) add(s);
  add(report.combined);
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << r[c] << std::string(width[c] - r[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json load_json(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    // Report a line number rather than a byte offset.
    const auto offset = std::min<std::size_t>(e.byte, bytes.size());
    const auto line = 1 + std::count(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw Error(ErrorCode::MalformedInput, path.string() + ": line " + std::to_string(line) + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_file_atomic(path, dump_json(j)); }

}  // namespace trackkit
