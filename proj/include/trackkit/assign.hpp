#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "trackkit/detect.hpp"
#include "trackkit/mask.hpp"

namespace trackkit {

enum class Orientation { minimize_cost, maximize_similarity };

/// Dense row-major matrix of costs or similarities.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  Orientation orientation = Orientation::minimize_cost;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, Orientation o = Orientation::minimize_cost)
      : rows(r), cols(c), values(r * c, 0.0), orientation(o) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Optimal assignment of min(rows, cols) pairs. Among optimal assignments the
/// row-to-column vector that is lexicographically smallest is returned
/// (an unassigned row sorts after every column). Pairs are sorted by row.
/// Throws NonFiniteValue.
Assignment hungarian(const CostMatrix& m);

/// Optimal partial assignment restricted to entries that pass `gate`
/// (similarity >= gate, or cost <= gate). Maximizes the summed margin over the
/// gate for costs and the summed similarity for similarities; pairs that fail
/// the gate are never returned. Same tie rule as hungarian().
Assignment gated_assign(const CostMatrix& m, double gate);

/// Repeatedly takes the best remaining entry that passes the gate. Equal
/// entries resolve to the smallest (row, col).
Assignment greedy_assign(const CostMatrix& m, double gate);

/// cost[i][j] = 1 - box_iou(track_i, det_j) * score_j.
CostMatrix fused_iou_cost(const std::vector<Box>& track_boxes, const std::vector<Detection>& dets);

/// cost[i][j] = 1 - box_iou(track_i, det_j).
CostMatrix iou_cost(const std::vector<Box>& track_boxes, const std::vector<Detection>& dets);

/// Sum of the matrix entries selected by an assignment.
double assignment_total(const CostMatrix& m, const Assignment& a);

}  // namespace trackkit
