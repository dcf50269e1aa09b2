#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "trackkit/error.hpp"
#include "trackkit/events.hpp"
#include "trackkit/fileutil.hpp"

namespace trackkit {
namespace {

constexpr char kMagic[4] = {'E', 'V', 'T', '1'};
constexpr std::size_t kHeaderBytes = 16;
constexpr std::size_t kRecordBytes = 13;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xff));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  return static_cast<T>(u);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line, const char* name) {
  T value{};
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line) + ": bad " + name + " '" +
                                               std::string(s) + "'");
  }
  return value;
}

}  // namespace

EventStream read_events_csv(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedInput, path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,t,p") {
    throw Error(ErrorCode::MalformedInput, path.string() + ": line 1: expected header 'x,y,t,p'");
  }
  EventStream s;
  int max_x = -1;
  int max_y = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::array<std::string_view, 4> fields;
    std::string_view rest(line);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (k == 3)) {
        throw Error(ErrorCode::MalformedInput, path.string() + ": line " + std::to_string(lineno) +
                                                   ": expected 4 fields");
      }
      fields[k] = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    const auto x = parse_field<int>(fields[0], lineno, "x");
    const auto y = parse_field<int>(fields[1], lineno, "y");
    const auto t = parse_field<std::int64_t>(fields[2], lineno, "t");
    const auto p = parse_field<int>(fields[3], lineno, "p");
    if (x < 0 || y < 0 || x > 65535 || y > 65535) {
      throw Error(ErrorCode::MalformedInput, path.string() + ": line " + std::to_string(lineno) +
                                                 ": coordinate out of range");
    }
    if (p != 0 && p != 1 && p != -1) {
      throw Error(ErrorCode::MalformedInput, path.string() + ": line " + std::to_string(lineno) +
                                                 ": polarity must be -1, 0 or 1");
    }
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
    s.events.push_back(Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                             static_cast<std::int8_t>(p == 0 ? -1 : p)});
  }
  s.width = width > 0 ? width : max_x + 1;
  s.height = height > 0 ? height : max_y + 1;
  s.validate();
  return s;
}

void write_events_csv(const std::filesystem::path& path, const EventStream& stream) {
  std::string out = "x,y,t,p\n";
  for (const Event& e : stream.events) {
    out += std::to_string(e.x) + ',' + std::to_string(e.y) + ',' + std::to_string(e.t) + ',' +
           std::to_string(static_cast<int>(e.p)) + '\n';
  }
  write_file_atomic(path, out);
}

EventStream read_events_bin(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": missing EVT1 header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  EventStream s;
  s.width = get_le<std::uint16_t>(p + 4);
  s.height = get_le<std::uint16_t>(p + 6);
  const auto count = get_le<std::uint64_t>(p + 8);
  if ((bytes.size() - kHeaderBytes) / kRecordBytes != count || (bytes.size() - kHeaderBytes) % kRecordBytes != 0) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": header declares " + std::to_string(count) +
                                               " records, file holds " +
                                               std::to_string((bytes.size() - kHeaderBytes) / kRecordBytes));
  }
  s.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const unsigned char* r = p + kHeaderBytes + i * kRecordBytes;
    const auto t = get_le<std::uint64_t>(r + 4);
    if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw Error(ErrorCode::MalformedInput, path.string() + ": record " + std::to_string(i) + ": timestamp overflow");
    }
    s.events.push_back(Event{get_le<std::uint16_t>(r), get_le<std::uint16_t>(r + 2), static_cast<std::int64_t>(t),
                             static_cast<std::int8_t>(r[12])});
  }
  s.validate();
  return s;
}

void write_events_bin(const std::filesystem::path& path, const EventStream& stream) {
  std::string out(kMagic, 4);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.width));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.height));
  put_le<std::uint64_t>(out, stream.events.size());
  out.reserve(kHeaderBytes + stream.events.size() * kRecordBytes);
  for (const Event& e : stream.events) {
    put_le<std::uint16_t>(out, e.x);
    put_le<std::uint16_t>(out, e.y);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.t));
    put_le<std::int8_t>(out, e.p);
  }
  write_file_atomic(path, out);
}

EventStream read_events(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) return read_events_bin(path);
  return read_events_csv(path, width, height);
}

void write_events(const std::filesystem::path& path, const EventStream& stream) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".evt") {
    write_events_bin(path, stream);
  } else {
    write_events_csv(path, stream);
  }
}

}  // namespace trackkit
