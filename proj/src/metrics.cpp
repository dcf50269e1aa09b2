#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <thread>

#include "trackkit/error.hpp"
#include "trackkit/metrics.hpp"
#include "trackkit/simd.hpp"

namespace trackkit {

double hota_alpha(int k) { return static_cast<double>(k + 1) / 20.0; }

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
  for (int k = 0; k < kHotaAlphaCount; ++k) {
    hota[k].tp += o.hota[k].tp;
    hota[k].fn += o.hota[k].fn;
    hota[k].fp += o.hota[k].fp;
    hota[k].assoc_sum += o.hota[k].assoc_sum;
  }
  gt_detections += o.gt_detections;
  pred_detections += o.pred_detections;
  mot_tp += o.mot_tp;
  mot_fn += o.mot_fn;
  mot_fp += o.mot_fp;
  idsw += o.idsw;
  idtp += o.idtp;
  idfn += o.idfn;
  idfp += o.idfp;
  return *this;
}

namespace {

CostMatrix iou_matrix(const std::vector<BinaryMask>& gt, const std::vector<BinaryMask>& pred) {
  CostMatrix m(gt.size(), pred.size(), Orientation::maximize_similarity);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) m(i, j) = mask_iou(gt[i], pred[j]);
  }
  return m;
}

struct FrameData {
  std::vector<std::size_t> gt_inst;    // instance index per present GT
  std::vector<std::size_t> pred_inst;  // instance index per present prediction
  CostMatrix iou;
};

void check_sequence(const SequenceTracks& s, const char* role) {
  std::set<int> ids;
  for (const auto& inst : s.instances) {
    if (!ids.insert(inst.id).second) {
      throw Error(ErrorCode::MalformedInput, std::string(role) + " sequence '" + s.id + "' repeats instance id " +
                                                 std::to_string(inst.id));
    }
    if (static_cast<int>(inst.segmentations.size()) != s.length) {
      throw Error(ErrorCode::MalformedInput, std::string(role) + " sequence '" + s.id + "' instance " +
                                                 std::to_string(inst.id) + " has " +
                                                 std::to_string(inst.segmentations.size()) +
                                                 " segmentations for length " + std::to_string(s.length));
    }
  }
}

std::vector<FrameData> prepare(const GtSequence& gt, const PredSequence& pred, std::vector<std::string>* warnings) {
  check_sequence(gt, "GT");
  check_sequence(pred, "prediction");
  if (gt.length != pred.length) {
    throw Error(ErrorCode::MalformedInput, "sequence '" + gt.id + "': GT length " + std::to_string(gt.length) +
                                               " vs prediction length " + std::to_string(pred.length));
  }
  std::vector<FrameData> frames(static_cast<std::size_t>(gt.length));
  for (int f = 0; f < gt.length; ++f) {
    std::vector<BinaryMask> gm, pm;
    FrameData& fd = frames[f];
    for (std::size_t i = 0; i < gt.instances.size(); ++i) {
      if (const auto& seg = gt.instances[i].segmentations[f]) {
        gm.push_back(decode_rle(*seg));
        fd.gt_inst.push_back(i);
      }
    }
    for (std::size_t j = 0; j < pred.instances.size(); ++j) {
      if (const auto& seg = pred.instances[j].segmentations[f]) {
        pm.push_back(decode_rle(*seg));
        fd.pred_inst.push_back(j);
      }
    }
    if (warnings) {
      const auto& kernels = simd::active_kernels();
      for (std::size_t a = 0; a < gm.size(); ++a) {
        for (std::size_t b = a + 1; b < gm.size(); ++b) {
          if (!gm[a].same_shape(gm[b])) continue;
          const auto counts = kernels.count_and_or(gm[a].raw(), gm[b].raw(), gm[a].size());
          const auto smaller = std::min(gm[a].area(), gm[b].area());
          if (smaller > 0 && static_cast<double>(counts.intersection) > 0.1 * static_cast<double>(smaller)) {
            warnings->push_back("sequence '" + gt.id + "' frame " + std::to_string(f) + ": GT instances " +
                                std::to_string(gt.instances[fd.gt_inst[a]].id) + " and " +
                                std::to_string(gt.instances[fd.gt_inst[b]].id) + " overlap by more than 10%");
          }
        }
      }
    }
    fd.iou = iou_matrix(gm, pm);
  }
  return frames;
}

void accumulate_hota(const std::vector<FrameData>& frames, std::size_t n_gt, std::size_t n_pred, MetricCounts& out) {
  std::vector<std::int64_t> gt_count(n_gt, 0), pred_count(n_pred, 0);
  for (const FrameData& fd : frames) {
    for (const auto g : fd.gt_inst) ++gt_count[g];
    for (const auto p : fd.pred_inst) ++pred_count[p];
  }
  for (int k = 0; k < kHotaAlphaCount; ++k) {
    const double alpha = hota_alpha(k);
    std::vector<std::int64_t> tpa(n_gt * n_pred, 0);
    auto& acc = out.hota[k];
    for (const FrameData& fd : frames) {
      const Assignment pairs = gated_assign(fd.iou, alpha);
      acc.tp += static_cast<std::int64_t>(pairs.size());
      acc.fn += static_cast<std::int64_t>(fd.gt_inst.size() - pairs.size());
      acc.fp += static_cast<std::int64_t>(fd.pred_inst.size() - pairs.size());
      for (const auto& [gi, pj] : pairs) ++tpa[fd.gt_inst[gi] * n_pred + fd.pred_inst[pj]];
    }
    for (std::size_t g = 0; g < n_gt; ++g) {
      for (std::size_t p = 0; p < n_pred; ++p) {
        const std::int64_t t = tpa[g * n_pred + p];
        if (t == 0) continue;
        const double a = static_cast<double>(t) / static_cast<double>(gt_count[g] + pred_count[p] - t);
        acc.assoc_sum += static_cast<double>(t) * a;
      }
    }
  }
}

void accumulate_clear(const std::vector<FrameData>& frames, double match_iou, MetricCounts& out) {
  std::map<std::size_t, std::size_t> last_match;  // gt instance -> pred instance
  for (const FrameData& fd : frames) {
    out.gt_detections += static_cast<std::int64_t>(fd.gt_inst.size());
    out.pred_detections += static_cast<std::int64_t>(fd.pred_inst.size());
    std::vector<char> gt_done(fd.gt_inst.size(), 0), pred_done(fd.pred_inst.size(), 0);
    Assignment matches;
    // Keep still-valid correspondences first.
    for (std::size_t gi = 0; gi < fd.gt_inst.size(); ++gi) {
      const auto it = last_match.find(fd.gt_inst[gi]);
      if (it == last_match.end()) continue;
      for (std::size_t pj = 0; pj < fd.pred_inst.size(); ++pj) {
        if (fd.pred_inst[pj] != it->second || pred_done[pj]) continue;
        if (fd.iou(gi, pj) >= match_iou) {
          gt_done[gi] = pred_done[pj] = 1;
          matches.emplace_back(gi, pj);
        }
        break;
      }
    }
    std::vector<std::size_t> rows, cols;
    for (std::size_t gi = 0; gi < gt_done.size(); ++gi) {
      if (!gt_done[gi]) rows.push_back(gi);
    }
    for (std::size_t pj = 0; pj < pred_done.size(); ++pj) {
      if (!pred_done[pj]) cols.push_back(pj);
    }
    CostMatrix rest(rows.size(), cols.size(), Orientation::maximize_similarity);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) rest(r, c) = fd.iou(rows[r], cols[c]);
    }
    for (const auto& [r, c] : gated_assign(rest, match_iou)) matches.emplace_back(rows[r], cols[c]);

    for (const auto& [gi, pj] : matches) {
      const std::size_t g = fd.gt_inst[gi];
      const std::size_t p = fd.pred_inst[pj];
      const auto it = last_match.find(g);
      if (it != last_match.end() && it->second != p) ++out.idsw;
      last_match[g] = p;
    }
    out.mot_tp += static_cast<std::int64_t>(matches.size());
    out.mot_fn += static_cast<std::int64_t>(fd.gt_inst.size() - matches.size());
    out.mot_fp += static_cast<std::int64_t>(fd.pred_inst.size() - matches.size());
  }
}

void accumulate_identity(const std::vector<FrameData>& frames, std::size_t n_gt, std::size_t n_pred,
                         double match_iou, MetricCounts& out) {
  CostMatrix weight(n_gt, n_pred, Orientation::maximize_similarity);
  std::int64_t gt_total = 0, pred_total = 0;
  for (const FrameData& fd : frames) {
    gt_total += static_cast<std::int64_t>(fd.gt_inst.size());
    pred_total += static_cast<std::int64_t>(fd.pred_inst.size());
    for (std::size_t gi = 0; gi < fd.gt_inst.size(); ++gi) {
      for (std::size_t pj = 0; pj < fd.pred_inst.size(); ++pj) {
        if (fd.iou(gi, pj) >= match_iou) weight(fd.gt_inst[gi], fd.pred_inst[pj]) += 1.0;
      }
    }
  }
  std::int64_t idtp = 0;
  for (const auto& [g, p] : hungarian(weight)) idtp += static_cast<std::int64_t>(weight(g, p));
  out.idtp += idtp;
  out.idfn += gt_total - idtp;
  out.idfp += pred_total - idtp;
}

}  // namespace

Assignment match_frame(const std::vector<BinaryMask>& gt_masks, const std::vector<BinaryMask>& pred_masks,
                       double alpha) {
  return gated_assign(iou_matrix(gt_masks, pred_masks), alpha);
}

HotaScores hota_from_counts(const MetricCounts& c) {
  HotaScores s;
  for (int k = 0; k < kHotaAlphaCount; ++k) {
    const auto& a = c.hota[k];
    const auto denom = static_cast<double>(a.tp + a.fn + a.fp);
    s.deta_per_alpha[k] = denom > 0 ? static_cast<double>(a.tp) / denom : 0.0;
    s.assa_per_alpha[k] = a.tp > 0 ? a.assoc_sum / static_cast<double>(a.tp) : 0.0;
    s.hota_per_alpha[k] = denom > 0 ? std::sqrt(a.assoc_sum / denom) : 0.0;
    s.hota += s.hota_per_alpha[k];
    s.deta += s.deta_per_alpha[k];
    s.assa += s.assa_per_alpha[k];
  }
  s.hota /= kHotaAlphaCount;
  s.deta /= kHotaAlphaCount;
  s.assa /= kHotaAlphaCount;
  return s;
}

ClearMotScores clear_mot_from_counts(const MetricCounts& c) {
  ClearMotScores s;
  s.idsw = c.idsw;
  s.fp = c.mot_fp;
  s.fn = c.mot_fn;
  s.tp = c.mot_tp;
  s.mota = c.gt_detections > 0
               ? 1.0 - static_cast<double>(c.mot_fn + c.mot_fp + c.idsw) / static_cast<double>(c.gt_detections)
               : 0.0;
  return s;
}

double idf1_from_counts(const MetricCounts& c) {
  const auto denom = static_cast<double>(2 * c.idtp + c.idfp + c.idfn);
  return denom > 0 ? 2.0 * static_cast<double>(c.idtp) / denom : 0.0;
}

MetricCounts evaluate_counts(const GtSequence& gt, const PredSequence& pred, double match_iou,
                             std::vector<std::string>* warnings) {
  const auto frames = prepare(gt, pred, warnings);
  MetricCounts counts;
  accumulate_hota(frames, gt.instances.size(), pred.instances.size(), counts);
  accumulate_clear(frames, match_iou, counts);
  accumulate_identity(frames, gt.instances.size(), pred.instances.size(), match_iou, counts);
  if (warnings && counts.hota[0].tp + counts.hota[0].fn + counts.hota[0].fp == 0) {
    warnings->push_back("sequence '" + gt.id + "' has no GT or predicted detections; scores are 0 by convention");
  }
  return counts;
}

HotaScores hota(const GtSequence& gt, const PredSequence& pred) {
  const auto frames = prepare(gt, pred, nullptr);
  MetricCounts counts;
  accumulate_hota(frames, gt.instances.size(), pred.instances.size(), counts);
  return hota_from_counts(counts);
}

ClearMotScores clear_mot(const GtSequence& gt, const PredSequence& pred, double match_iou) {
  const auto frames = prepare(gt, pred, nullptr);
  MetricCounts counts;
  accumulate_clear(frames, match_iou, counts);
  return clear_mot_from_counts(counts);
}

double idf1(const GtSequence& gt, const PredSequence& pred, double match_iou) {
  const auto frames = prepare(gt, pred, nullptr);
  MetricCounts counts;
  accumulate_identity(frames, gt.instances.size(), pred.instances.size(), match_iou, counts);
  return idf1_from_counts(counts);
}

namespace {

SequenceMetrics finish(std::string id, const MetricCounts& counts) {
  SequenceMetrics m;
  m.sequence_id = std::move(id);
  m.counts = counts;
  m.hota = hota_from_counts(counts);
  m.clear = clear_mot_from_counts(counts);
  m.idf1 = idf1_from_counts(counts);
  return m;
}

}  // namespace

EvalReport evaluate(const std::vector<GtSequence>& gts, const std::vector<PredSequence>& preds, double match_iou,
                    int jobs) {
  std::map<std::string, const PredSequence*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.id, &p).second) {
      throw Error(ErrorCode::MalformedInput, "prediction sequence '" + p.id + "' appears twice");
    }
  }
  std::set<std::string> gt_ids;
  for (const auto& g : gts) {
    if (!gt_ids.insert(g.id).second) throw Error(ErrorCode::MalformedInput, "GT sequence '" + g.id + "' appears twice");
    if (!by_id.count(g.id)) throw Error(ErrorCode::UnknownSequenceId, "no prediction for sequence '" + g.id + "'");
  }
  for (const auto& p : preds) {
    if (!gt_ids.count(p.id)) throw Error(ErrorCode::UnknownSequenceId, "prediction for unknown sequence '" + p.id + "'");
  }

  std::vector<MetricCounts> counts(gts.size());
  std::vector<std::vector<std::string>> warnings(gts.size());
  std::vector<std::exception_ptr> failures(gts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < gts.size(); i = next++) {
      try {
        counts[i] = evaluate_counts(gts[i], *by_id.at(gts[i].id), match_iou, &warnings[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, std::max<int>(1, static_cast<int>(gts.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EvalReport report;
  MetricCounts total;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    report.sequences.push_back(finish(gts[i].id, counts[i]));
    total += counts[i];
    report.warnings.insert(report.warnings.end(), warnings[i].begin(), warnings[i].end());
  }
  report.combined = finish("COMBINED", total);
  return report;
}

}  // namespace trackkit
