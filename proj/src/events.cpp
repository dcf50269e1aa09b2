#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

#include "trackkit/error.hpp"
#include "trackkit/events.hpp"

namespace trackkit {

void EventStream::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x >= width || e.y >= height) {
      throw Error(ErrorCode::MalformedInput, "event " + std::to_string(i) + " outside the " +
                                                 std::to_string(width) + "x" + std::to_string(height) + " sensor");
    }
    if (e.p != 1 && e.p != -1) {
      throw Error(ErrorCode::MalformedInput, "event " + std::to_string(i) + " has polarity " + std::to_string(e.p));
    }
    if (i > 0 && e.t < events[i - 1].t) {
      throw Error(ErrorCode::MalformedInput, "events not sorted by time at index " + std::to_string(i));
    }
  }
}

EventWindow window_at(const EventStream& stream, std::int64_t frame_time, std::size_t size) {
  const auto& ev = stream.events;
  if (ev.empty()) throw Error(ErrorCode::EmptyStream, "no events to window");
  if (size == 0) throw Error(ErrorCode::ConfigViolation, "window size must be >= 1");
  auto it = std::lower_bound(ev.begin(), ev.end(), frame_time,
                             [](const Event& e, std::int64_t t) { return e.t < t; });
  std::size_t anchor = static_cast<std::size_t>(it - ev.begin());
  if (anchor == ev.size()) anchor = ev.size() - 1;
  const std::size_t before = size / 2;
  const std::size_t after = size - before;
  const std::size_t lo = anchor >= before ? anchor - before : 0;
  const std::size_t hi = std::min(ev.size(), anchor + after);
  EventWindow w;
  w.events = std::span<const Event>(ev).subspan(lo, hi - lo);
  w.offset = lo;
  w.anchor_index = anchor - lo;
  w.truncated = (hi - lo) < size;
  return w;
}

// Gaussian mixture -------------------------------------------------------------

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

double log_normal(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

struct Component {
  double mu;
  double var;
  double weight;
};

}  // namespace

GmmFit fit_gmm_1d(const std::vector<double>& values, const GmmOptions& opts) {
  GmmFit fit;
  fit.counts = values;
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::DegenerateInput, "no values to fit");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) {
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(n);
    fit.mu1 = fit.mu2 = mean;
    fit.sigma1 = fit.sigma2 = std::sqrt(opts.variance_floor);
    fit.w1 = fit.w2 = 0.5;
    fit.degenerate = true;
    fit.low_responsibility.assign(n, 1.0);
    return fit;
  }

  // k-means++ seeding: one uniformly drawn value, then one drawn with
  // probability proportional to the squared distance from it.
  std::mt19937_64 rng(opts.seed);
  const double c1 = values[rng() % n];
  double total = 0.0;
  for (const double v : values) total += (v - c1) * (v - c1);
  double target = uniform01(rng) * total;
  double c2 = values.back();
  for (const double v : values) {
    const double d = (v - c1) * (v - c1);
    if (d > 0.0 && target < d) {
      c2 = v;
      break;
    }
    target -= d;
  }
  if (c2 == c1) c2 = (*max_it == c1) ? *min_it : *max_it;

  Component comp[2];
  {
    double sum[2] = {0, 0}, sq[2] = {0, 0}, cnt[2] = {0, 0};
    for (const double v : values) {
      const int k = std::abs(v - c1) <= std::abs(v - c2) ? 0 : 1;
      sum[k] += v;
      sq[k] += v * v;
      cnt[k] += 1.0;
    }
    for (int k = 0; k < 2; ++k) {
      const double mu = sum[k] / cnt[k];
      comp[k] = {mu, std::max(sq[k] / cnt[k] - mu * mu, opts.variance_floor), cnt[k] / static_cast<double>(n)};
    }
  }

  std::vector<double> resp(n);
  double previous = -std::numeric_limits<double>::infinity();
  [[maybe_unused]] bool floored = false;
  for (int it = 0;; ++it) {
    // E-step
    double ll = 0.0;
    const double s0 = std::sqrt(comp[0].var);
    const double s1 = std::sqrt(comp[1].var);
    const double lw0 = std::log(comp[0].weight);
    const double lw1 = std::log(comp[1].weight);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = lw0 + log_normal(values[i], comp[0].mu, s0);
      const double b = lw1 + log_normal(values[i], comp[1].mu, s1);
      const double m = std::max(a, b);
      const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
      ll += lse;
      resp[i] = std::exp(a - lse);
    }
    fit.log_likelihood.push_back(ll);
    assert(floored || it == 0 || ll >= previous - 1e-9 * std::abs(previous));
    fit.iterations = it;
    if ((it > 0 && std::abs(ll - previous) < opts.tolerance) || it >= opts.max_iterations) break;
    previous = ll;

    // M-step
    double nk[2] = {0, 0}, sum[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      nk[0] += resp[i];
      nk[1] += 1.0 - resp[i];
      sum[0] += resp[i] * values[i];
      sum[1] += (1.0 - resp[i]) * values[i];
    }
    for (int k = 0; k < 2; ++k) {
      if (nk[k] <= std::numeric_limits<double>::min()) continue;
      const double mu = sum[k] / nk[k];
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = k == 0 ? resp[i] : 1.0 - resp[i];
        var += r * (values[i] - mu) * (values[i] - mu);
      }
      var /= nk[k];
      if (var < opts.variance_floor) {
        var = opts.variance_floor;
        floored = true;
      }
      comp[k] = {mu, var, nk[k] / static_cast<double>(n)};
    }
    const double wsum = comp[0].weight + comp[1].weight;
    comp[0].weight /= wsum;
    comp[1].weight = 1.0 - comp[0].weight;
  }

  if (comp[0].mu > comp[1].mu) {
    std::swap(comp[0], comp[1]);
    for (double& r : resp) r = 1.0 - r;
  }
  fit.mu1 = comp[0].mu;
  fit.mu2 = comp[1].mu;
  fit.sigma1 = std::sqrt(comp[0].var);
  fit.sigma2 = std::sqrt(comp[1].var);
  fit.w1 = comp[0].weight;
  fit.w2 = 1.0 - comp[0].weight;
  fit.low_responsibility = std::move(resp);
  return fit;
}

GmmFit fit_count_gmm(const EventWindow& window, int width, const GmmOptions& opts) {
  if (window.size() == 0) throw Error(ErrorCode::EmptyStream, "empty event window");
  std::vector<std::uint32_t> idx;
  idx.reserve(window.size());
  for (const Event& e : window.events) {
    idx.push_back(static_cast<std::uint32_t>(e.y) * static_cast<std::uint32_t>(width) + e.x);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<std::uint32_t> pixels;
  std::vector<double> counts;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && idx[j] == idx[i]) ++j;
    pixels.push_back(idx[i]);
    counts.push_back(static_cast<double>(j - i));
    i = j;
  }
  GmmFit fit = fit_gmm_1d(counts, opts);
  fit.pixels = std::move(pixels);
  return fit;
}

std::vector<Event> select_events(const EventWindow& window, const GmmFit& fit, int width, double tau) {
  const double delta_mu = std::abs(fit.mu1 - fit.mu2);
  if (fit.degenerate || delta_mu < tau) return {window.events.begin(), window.events.end()};
  std::unordered_map<std::uint32_t, bool> keep;
  keep.reserve(fit.pixels.size());
  for (std::size_t i = 0; i < fit.pixels.size(); ++i) {
    // Ties go to the low-frequency cluster.
    keep.emplace(fit.pixels[i], fit.low_responsibility[i] >= 0.5);
  }
  std::vector<Event> out;
  for (const Event& e : window.events) {
    const auto it = keep.find(static_cast<std::uint32_t>(e.y) * static_cast<std::uint32_t>(width) + e.x);
    if (it != keep.end() && it->second) out.push_back(e);
  }
  return out;
}

// Voxel grid -----------------------------------------------------------------

std::vector<BinWeight> temporal_weights(std::int64_t t, std::int64_t t_start, std::int64_t t_end, int bins) {
  if (t >= t_end) return {{bins - 1, 1.0}};
  const double tn = static_cast<double>(bins - 1) * static_cast<double>(t - t_start) /
                    static_cast<double>(t_end - t_start);
  const double lower = std::floor(tn);
  const double frac = tn - lower;
  const int b0 = static_cast<int>(lower);
  if (frac == 0.0 || b0 + 1 >= bins) return {{b0, 1.0}};
  return {{b0, 1.0 - frac}, {b0 + 1, frac}};
}

VoxelGrid voxelize(std::span<const Event> events, int height, int width, int bins, std::int64_t t_start,
                   std::int64_t t_end, PolarityMode mode) {
  if (!(t_start < t_end)) throw Error(ErrorCode::EmptyTimeRange, "voxel time range is empty");
  if (bins < 1) throw Error(ErrorCode::ConfigViolation, "voxel grid needs at least one bin");
  VoxelGrid g;
  g.height = height;
  g.width = width;
  g.bins = bins;
  g.channels = mode == PolarityMode::per_polarity ? 2 : 1;
  g.values.assign(static_cast<std::size_t>(g.channels) * bins * height * width, 0.0f);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (const Event& e : events) {
    if (e.t < t_start || e.t > t_end || e.x >= width || e.y >= height) continue;
    const std::size_t pixel = static_cast<std::size_t>(e.y) * width + e.x;
    int channel = 0;
    double sign = e.p >= 0 ? 1.0 : -1.0;
    if (mode == PolarityMode::per_polarity) {
      channel = e.p >= 0 ? 1 : 0;
      sign = 1.0;
    }
    for (const BinWeight& bw : temporal_weights(e.t, t_start, t_end, bins)) {
      g.values[(static_cast<std::size_t>(channel) * bins + bw.bin) * plane + pixel] +=
          static_cast<float>(sign * bw.weight);
    }
  }
  return g;
}

}  // namespace trackkit
