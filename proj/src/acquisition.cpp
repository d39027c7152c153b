#include "flexsign/acquisition.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "flexsign/errors.hpp"

namespace flexsign {

namespace {

// Parses an unsigned decimal field; false on empty/non-digit/overflow.
bool parse_u64_field(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  std::uint64_t v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
    const auto digit = static_cast<std::uint64_t>(ch - '0');
    if (v > (UINT64_MAX - digit) / 10) return false;
    v = v * 10 + digit;
  }
  out = v;
  return true;
}

}  // namespace

std::variant<SensorFrame, FrameParseError> parse_frame(std::string_view line,
                                                       int channels) {
  using Kind = FrameParseError::Kind;
  if (line.size() > kMaxLineBytes)
    return FrameParseError{Kind::overlong,
                           "line of " + std::to_string(line.size()) + " bytes"};
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);

  // split on commas; exactly channels+1 fields expected
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (fields.size() != static_cast<std::size_t>(channels) + 1)
    return FrameParseError{Kind::field_count,
                           "expected " + std::to_string(channels + 1) + " fields, got " +
                               std::to_string(fields.size())};

  SensorFrame f;
  if (!parse_u64_field(fields[0], f.timestamp_ms))
    return FrameParseError{Kind::bad_number, "bad timestamp"};

  f.readings.reserve(static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    std::uint64_t v = 0;
    if (!parse_u64_field(fields[static_cast<std::size_t>(c) + 1], v))
      return FrameParseError{Kind::bad_number, "bad reading in channel " + std::to_string(c)};
    if (v > static_cast<std::uint64_t>(kAdcFullScale))
      return FrameParseError{Kind::out_of_range,
                             "reading " + std::to_string(v) + " exceeds " +
                                 std::to_string(kAdcFullScale)};
    f.readings.push_back(static_cast<int>(v));
  }
  return f;
}

std::string format_frame(const SensorFrame& f) {
  std::string out = std::to_string(f.timestamp_ms);
  for (int r : f.readings) {
    out += ',';
    out += std::to_string(r);
  }
  out += '\n';
  return out;
}

NormFrame normalize_frame(const SensorFrame& f) {
  NormFrame n;
  n.timestamp_ms = static_cast<double>(f.timestamp_ms);
  n.values.reserve(f.readings.size());
  for (int r : f.readings) n.values.push_back(normalize_reading(r));
  return n;
}

void CaptureConfig::validate() const {
  if (window_instants < 2) throw DataError("window_instants must be at least 2");
  if (channels < 1) throw DataError("channels must be positive");
  if (!(capture_ms > 0)) throw DataError("capture_ms must be positive");
  if (!(onset_threshold >= 0)) throw DataError("onset_threshold must be non-negative");
  if (onset_span < 1) throw DataError("onset_span must be at least 1");
}

namespace {

bool onset_between(const NormFrame& now, const NormFrame& past, const CaptureConfig& cfg) {
  double max_step = 0.0;
  for (std::size_t c = 0; c < now.values.size(); ++c)
    max_step = std::max(max_step, std::abs(now.values[c] - past.values[c]));
  return max_step > cfg.onset_threshold;
}

}  // namespace

std::optional<std::size_t> detect_onset(const std::vector<NormFrame>& frames,
                                        const CaptureConfig& cfg) {
  cfg.validate();
  const auto span = static_cast<std::size_t>(cfg.onset_span);
  for (std::size_t i = span; i < frames.size(); ++i)
    if (onset_between(frames[i], frames[i - span], cfg)) return i;
  return std::nullopt;
}

GestureWindow capture_window(const std::vector<NormFrame>& frames,
                             const CaptureConfig& cfg) {
  cfg.validate();
  if (frames.size() < 2) throw DataError("capture needs at least 2 frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].values.size() != static_cast<std::size_t>(cfg.channels))
      throw DataError("frame channel count does not match capture config");
    if (i > 0 && !(frames[i].timestamp_ms > frames[i - 1].timestamp_ms))
      throw DataError("frame timestamps must be strictly increasing");
  }

  const double t0 = frames.front().timestamp_ms;
  const double t1 = frames.back().timestamp_ms;
  const int T = cfg.window_instants;
  GestureWindow w(T, cfg.channels);

  std::size_t seg = 0;  // frames[seg] .. frames[seg+1] brackets the target time
  for (int k = 0; k < T; ++k) {
    const double target = t0 + (t1 - t0) * static_cast<double>(k) / (T - 1);
    while (seg + 2 < frames.size() && frames[seg + 1].timestamp_ms <= target) ++seg;
    const NormFrame& a = frames[seg];
    const NormFrame& b = frames[seg + 1];
    for (int c = 0; c < cfg.channels; ++c) {
      const std::size_t ci = static_cast<std::size_t>(c);
      double v;
      if (target <= a.timestamp_ms) {
        v = a.values[ci];  // exact hit: keep the frame value bit-for-bit
      } else if (target >= b.timestamp_ms) {
        v = b.values[ci];
      } else {
        const double frac = (target - a.timestamp_ms) / (b.timestamp_ms - a.timestamp_ms);
        // linear interpolation of in-range values stays in range up to rounding
        v = std::clamp(a.values[ci] + (b.values[ci] - a.values[ci]) * frac, 0.0, 1.0);
      }
      w.set(k, c, v);
    }
  }
  return w;
}

SignSegmenter::SignSegmenter(const CaptureConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<std::vector<NormFrame>> SignSegmenter::push(const NormFrame& frame) {
  if (capturing_) {
    if (frame.timestamp_ms - capture_.front().timestamp_ms >= cfg_.capture_ms) {
      // window closed by this frame; frame itself starts the next standby
      std::vector<NormFrame> done = std::move(capture_);
      capture_.clear();
      capturing_ = false;
      recent_.clear();
      recent_.push_back(frame);
      return done;
    }
    capture_.push_back(frame);
    return std::nullopt;
  }

  recent_.push_back(frame);
  const auto need = static_cast<std::size_t>(cfg_.onset_span) + 1;
  if (recent_.size() > need) recent_.pop_front();
  if (recent_.size() == need && onset_between(recent_.back(), recent_.front(), cfg_)) {
    capturing_ = true;
    capture_.clear();
    // one frame of lead-in keeps the resting posture on instant zero
    capture_.push_back(recent_[recent_.size() - 2]);
    capture_.push_back(recent_.back());
    recent_.clear();
  }
  return std::nullopt;
}

std::optional<std::vector<NormFrame>> SignSegmenter::flush() {
  if (!capturing_ || capture_.size() < 2) {
    capturing_ = false;
    capture_.clear();
    return std::nullopt;
  }
  std::vector<NormFrame> done = std::move(capture_);
  capture_.clear();
  capturing_ = false;
  return done;
}

std::optional<SensorFrame> FrameSource::next() {
  for (;;) {
    auto line = next_line();
    if (!line) {
      if (!quality_checked_) {
        quality_checked_ = true;
        if (lines_ >= kQualityMinLines &&
            malformed_ * 10 > lines_)  // malformed fraction above 10%
          throw DataError("stream quality: " + std::to_string(malformed_) + " of " +
                          std::to_string(lines_) + " lines were malformed");
      }
      return std::nullopt;
    }
    ++lines_;
    auto parsed = parse_frame(*line, channels_);
    if (std::holds_alternative<FrameParseError>(parsed)) {
      ++malformed_;
      continue;
    }
    auto& frame = std::get<SensorFrame>(parsed);
    if (has_prev_ts_ && frame.timestamp_ms <= prev_ts_) {
      ++malformed_;  // timestamp regression: treat like a corrupt line
      continue;
    }
    has_prev_ts_ = true;
    prev_ts_ = frame.timestamp_ms;
    return frame;
  }
}

namespace {

class FileFrameSource final : public FrameSource {
 public:
  FileFrameSource(const std::string& path, int channels)
      : FrameSource(channels), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "'");
  }

 protected:
  std::optional<std::string> next_line() override {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    return line;
  }

 private:
  std::ifstream in_;
};

class TcpFrameSource final : public FrameSource {
 public:
  TcpFrameSource(const std::string& host, const std::string& port, int channels)
      : FrameSource(channels) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
      throw IoError("cannot resolve '" + host + ":" + port + "'");
    int fd = -1;
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
      fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) throw IoError("cannot connect to '" + host + ":" + port + "'");
    fd_ = fd;
  }

  ~TcpFrameSource() override {
    if (fd_ >= 0) ::close(fd_);
  }

 protected:
  std::optional<std::string> next_line() override {
    for (;;) {
      const std::size_t pos = buffer_.find('\n');
      if (pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      if (eof_) {
        if (buffer_.empty()) return std::nullopt;
        std::string line = std::move(buffer_);
        buffer_.clear();
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) {
        // peer closed or connection dropped: either way the session is over
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_ = -1;
  bool eof_ = false;
  std::string buffer_;
};

}  // namespace

std::unique_ptr<FrameSource> open_stream(const std::string& source_spec, int channels) {
  if (source_spec.rfind("file:", 0) == 0)
    return std::make_unique<FileFrameSource>(source_spec.substr(5), channels);
  if (source_spec.rfind("tcp:", 0) == 0) {
    const std::string rest = source_spec.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size())
      throw DataError("tcp source must look like tcp:<host>:<port>");
    return std::make_unique<TcpFrameSource>(rest.substr(0, colon), rest.substr(colon + 1),
                                            channels);
  }
  throw DataError("unknown source '" + source_spec +
                  "' (expected file:<path> or tcp:<host>:<port>)");
}

}  // namespace flexsign
