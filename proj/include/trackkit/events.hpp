#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace trackkit {

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int64_t t = 0;  // microseconds
  std::int8_t p = 1;   // -1 or +1

  friend bool operator==(const Event&, const Event&) = default;
};

/// Time-sorted events of a W x H sensor.
struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  /// Throws MalformedInput on out-of-range coordinates, bad polarity or unsorted time.
  void validate() const;
};

struct EventWindow {
  std::span<const Event> events;
  /// Offset of the first window event within the stream.
  std::size_t offset = 0;
  /// Position of the anchor event inside `events`.
  std::size_t anchor_index = 0;
  std::size_t size() const noexcept { return events.size(); }
  /// Set when the window was clipped at a stream end.
  bool truncated = false;
};

/// Window of `size` events around the first event with t >= frame_time:
/// floor(size/2) events before it and ceil(size/2) from it onward, clipped at
/// the stream ends. Throws EmptyStream.
EventWindow window_at(const EventStream& stream, std::int64_t frame_time, std::size_t size);

struct GmmFit {
  // Component 1 is the low-frequency cluster (mu1 <= mu2).
  double mu1 = 0.0, mu2 = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0;
  double w1 = 0.5, w2 = 0.5;
  /// Fewer than two distinct counts; a single cluster was fitted.
  bool degenerate = false;
  int iterations = 0;
  /// Pixel index (y * width + x) of every pixel with at least one event.
  std::vector<std::uint32_t> pixels;
  std::vector<double> counts;
  /// Responsibility of the low-frequency cluster for each pixel.
  std::vector<double> low_responsibility;
  /// Data log-likelihood after each EM iteration.
  std::vector<double> log_likelihood;
};

struct GmmOptions {
  std::uint64_t seed = 42;
  int max_iterations = 200;
  double tolerance = 1e-6;
  double variance_floor = 1e-4;
};

/// Two-component 1-D Gaussian mixture over per-pixel event counts of the window.
GmmFit fit_count_gmm(const EventWindow& window, int width, const GmmOptions& opts = {});
/// Same fit on raw values; the building block of fit_count_gmm.
GmmFit fit_gmm_1d(const std::vector<double>& values, const GmmOptions& opts = {});

/// Keeps only low-frequency-cluster events when |mu1 - mu2| >= tau, else everything.
std::vector<Event> select_events(const EventWindow& window, const GmmFit& fit, int width, double tau = 2.5);

enum class PolarityMode { signed_sum, per_polarity };

struct VoxelGrid {
  int height = 0;
  int width = 0;
  int bins = 0;
  /// 1 for signed accumulation; 2 for per-polarity (negative channel first).
  int channels = 1;
  /// Layout [channel][bin][row][col].
  std::vector<float> values;

  float at(int channel, int bin, int row, int col) const {
    return values[((static_cast<std::size_t>(channel) * bins + bin) * height + row) * width + col];
  }
};

struct BinWeight {
  int bin = 0;
  double weight = 0.0;
};

/// Temporal interpolation weights of one timestamp: at most two bins.
std::vector<BinWeight> temporal_weights(std::int64_t t, std::int64_t t_start, std::int64_t t_end, int bins);

/// Throws EmptyTimeRange when t_start >= t_end. Events outside the range or
/// the sensor are ignored.
VoxelGrid voxelize(std::span<const Event> events, int height, int width, int bins, std::int64_t t_start,
                   std::int64_t t_end, PolarityMode mode = PolarityMode::signed_sum);

// File formats ---------------------------------------------------------------

/// CSV with header `x,y,t,p`. Polarity 0 maps to -1. Width/height are taken
/// from the arguments when positive, otherwise from the largest coordinates.
EventStream read_events_csv(const std::filesystem::path& path, int width = 0, int height = 0);
void write_events_csv(const std::filesystem::path& path, const EventStream& stream);

/// Packed little-endian binary: "EVT1", u16 W, u16 H, u64 count, then
/// records of u16 x, u16 y, u64 t, i8 p.
EventStream read_events_bin(const std::filesystem::path& path);
void write_events_bin(const std::filesystem::path& path, const EventStream& stream);

/// Dispatches on the file's magic bytes.
EventStream read_events(const std::filesystem::path& path, int width = 0, int height = 0);
/// Writes binary when the extension is .bin/.evt, CSV otherwise.
void write_events(const std::filesystem::path& path, const EventStream& stream);

}  // namespace trackkit
