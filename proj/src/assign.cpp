#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "trackkit/assign.hpp"
#include "trackkit/error.hpp"

namespace trackkit {
namespace {

void require_finite(const CostMatrix& m) {
  if (m.values.size() != m.rows * m.cols) {
    throw Error(ErrorCode::SizeMismatch, "cost matrix storage does not match its shape");
  }
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    if (!std::isfinite(m.values[k])) {
      throw Error(ErrorCode::NonFiniteValue, "entry (" + std::to_string(k / m.cols) + ", " +
                                                 std::to_string(k % m.cols) + ")");
    }
  }
}

/// Square minimum-cost assignment.
class SquareSolver {
 public:
  SquareSolver(std::size_t n, std::vector<double> cost) : n_(n), cost_(std::move(cost)) {}

  /// Returns row -> column.
  std::vector<std::size_t> solve() {
    if (n_ == 0) return {};
    run_potentials();
    lexicographic_refine();
    return row_to_col_;
  }

 private:
  double c(std::size_t r, std::size_t col) const { return cost_[r * n_ + col]; }

  // Shortest augmenting path formulation with row/column potentials. After it
  // finishes, u_[r] + v_[c] <= cost(r, c) everywhere with equality on the
  // returned matching, i.e. the potentials are dual optimal.
  void run_potentials() {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n_ + 1, 0.0), v(n_ + 1, 0.0), minv(n_ + 1);
    std::vector<std::size_t> p(n_ + 1, 0), way(n_ + 1, 0);
    std::vector<char> used(n_ + 1);
    for (std::size_t i = 1; i <= n_; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::fill(minv.begin(), minv.end(), inf);
      std::fill(used.begin(), used.end(), 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n_; ++j) {
          if (used[j]) continue;
          const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n_; ++j) {
          if (used[j]) {
            u[p[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    row_to_col_.assign(n_, 0);
    col_to_row_.assign(n_, 0);
    for (std::size_t j = 1; j <= n_; ++j) {
      row_to_col_[p[j] - 1] = j - 1;
      col_to_row_[j - 1] = p[j] - 1;
    }
    double scale = 1.0;
    for (const double x : cost_) scale = std::max(scale, std::abs(x));
    const double tol = 1e-9 * scale;
    tight_.assign(n_ * n_, 0);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t col = 0; col < n_; ++col) {
        tight_[r * n_ + col] = (c(r, col) - u[r + 1] - v[col + 1]) <= tol;
      }
    }
  }

  bool tight(std::size_t r, std::size_t col) const { return tight_[r * n_ + col] != 0; }

  // Every perfect matching inside the tight subgraph is optimal, so the
  // lexicographically smallest optimal assignment is found by fixing rows in
  // order and rerouting the current matching along alternating paths.
  void lexicographic_refine() {
    fixed_.assign(n_, 0);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t col = 0; col < n_; ++col) {
        if (!tight(r, col)) continue;
        if (row_to_col_[r] == col) break;
        const std::size_t owner = col_to_row_[col];
        if (fixed_[owner]) continue;
        const std::size_t target = row_to_col_[r];
        // Find an alternating path from `owner` that ends at `target`,
        // avoiding `col` and every fixed row.
        visited_.assign(n_, 0);
        visited_[col] = 1;
        path_.clear();
        if (reroute(owner, target, r)) {
          // path_ holds (row, new column) pairs.
          for (const auto& [row, new_col] : path_) {
            row_to_col_[row] = new_col;
            col_to_row_[new_col] = row;
          }
          row_to_col_[r] = col;
          col_to_row_[col] = r;
          break;
        }
      }
      fixed_[r] = 1;
    }
  }

  bool reroute(std::size_t row, std::size_t target, std::size_t pivot) {
    for (std::size_t col = 0; col < n_; ++col) {
      if (visited_[col] || !tight(row, col)) continue;
      visited_[col] = 1;
      if (col == target) {
        path_.emplace_back(row, col);
        return true;
      }
      const std::size_t next = col_to_row_[col];
      if (next == pivot || fixed_[next]) continue;
      if (reroute(next, target, pivot)) {
        path_.emplace_back(row, col);
        return true;
      }
    }
    return false;
  }

  std::size_t n_;
  std::vector<double> cost_;
  std::vector<std::size_t> row_to_col_;
  std::vector<std::size_t> col_to_row_;
  std::vector<char> tight_;
  std::vector<char> fixed_;
  std::vector<char> visited_;
  std::vector<std::pair<std::size_t, std::size_t>> path_;
};

bool passes(const CostMatrix& m, double value, double gate) {
  return m.orientation == Orientation::maximize_similarity ? value >= gate : value <= gate;
}

}  // namespace

Assignment hungarian(const CostMatrix& m) {
  require_finite(m);
  if (m.rows == 0 || m.cols == 0) return {};
  const std::size_t n = std::max(m.rows, m.cols);
  const double sign = m.orientation == Orientation::maximize_similarity ? -1.0 : 1.0;
  // Padding with a constant does not change which assignment is optimal:
  // every assignment uses the same number of padded cells.
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) cost[r * n + c] = sign * m(r, c);
  }
  const auto row_to_col = SquareSolver(n, std::move(cost)).solve();
  Assignment out;
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (row_to_col[r] < m.cols) out.emplace_back(r, row_to_col[r]);
  }
  return out;
}

Assignment gated_assign(const CostMatrix& m, double gate) {
  require_finite(m);
  if (!std::isfinite(gate)) throw Error(ErrorCode::NonFiniteValue, "gate");
  if (m.rows == 0 || m.cols == 0) return {};
  const bool similarity = m.orientation == Orientation::maximize_similarity;
  // Rows and columns may stay unmatched at zero gain: the square problem gets
  // one dummy column per row and one dummy row per column.
  const std::size_t n = m.rows + m.cols;
  double penalty = 1.0;
  std::vector<double> gain(m.rows * m.cols, 0.0);
  std::vector<char> feasible(m.rows * m.cols, 0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double v = m(r, c);
      if (!passes(m, v, gate)) continue;
      feasible[r * m.cols + c] = 1;
      gain[r * m.cols + c] = similarity ? v : gate - v;
      penalty += std::abs(gain[r * m.cols + c]);
    }
  }
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      cost[r * n + c] = feasible[r * m.cols + c] ? -gain[r * m.cols + c] : penalty;
    }
  }
  const auto row_to_col = SquareSolver(n, std::move(cost)).solve();
  Assignment out;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const std::size_t c = row_to_col[r];
    if (c < m.cols && feasible[r * m.cols + c]) out.emplace_back(r, c);
  }
  return out;
}

Assignment greedy_assign(const CostMatrix& m, double gate) {
  require_finite(m);
  const bool similarity = m.orientation == Orientation::maximize_similarity;
  std::vector<std::tuple<double, std::size_t, std::size_t>> entries;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (passes(m, m(r, c), gate)) entries.emplace_back(similarity ? -m(r, c) : m(r, c), r, c);
    }
  }
  std::sort(entries.begin(), entries.end());
  std::vector<char> row_used(m.rows, 0), col_used(m.cols, 0);
  Assignment out;
  for (const auto& [key, r, c] : entries) {
    if (row_used[r] || col_used[c]) continue;
    row_used[r] = col_used[c] = 1;
    out.emplace_back(r, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CostMatrix fused_iou_cost(const std::vector<Box>& track_boxes, const std::vector<Detection>& dets) {
  CostMatrix m(track_boxes.size(), dets.size(), Orientation::minimize_cost);
  for (std::size_t i = 0; i < track_boxes.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
      m(i, j) = 1.0 - box_iou(track_boxes[i], dets[j].box) * dets[j].score;
    }
  }
  return m;
}

CostMatrix iou_cost(const std::vector<Box>& track_boxes, const std::vector<Detection>& dets) {
  CostMatrix m(track_boxes.size(), dets.size(), Orientation::minimize_cost);
  for (std::size_t i = 0; i < track_boxes.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) m(i, j) = 1.0 - box_iou(track_boxes[i], dets[j].box);
  }
  return m;
}

double assignment_total(const CostMatrix& m, const Assignment& a) {
  double total = 0.0;
  for (const auto& [r, c] : a) total += m(r, c);
  return total;
}

}  // namespace trackkit
