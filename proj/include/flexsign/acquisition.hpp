#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flexsign/core.hpp"

namespace flexsign {

// One reading of every channel at one moment, in raw ADC counts. On the wire
// a frame is one LF-terminated ASCII line: <timestamp_ms>,<r0>,<r1>,<r2>
struct SensorFrame {
  std::uint64_t timestamp_ms = 0;
  std::vector<int> readings;

  bool operator==(const SensorFrame&) const = default;
};

inline constexpr std::size_t kMaxLineBytes = 64;

struct FrameParseError {
  enum class Kind { overlong, field_count, bad_number, out_of_range };
  Kind kind = Kind::bad_number;
  std::string detail;
};

// Total over arbitrary bytes: every input yields either a frame or a typed
// error, never an exception or abort. A single trailing LF is accepted.
std::variant<SensorFrame, FrameParseError> parse_frame(std::string_view line,
                                                       int channels = kDefaultChannels);

std::string format_frame(const SensorFrame& f);

// A frame with readings mapped onto [0, 1].
struct NormFrame {
  double timestamp_ms = 0.0;
  std::vector<double> values;
};

NormFrame normalize_frame(const SensorFrame& f);

struct CaptureConfig {
  int window_instants = kDefaultInstants;
  int channels = kDefaultChannels;
  double capture_ms = 1900.0;  // ~100 ms per instant
  double onset_threshold = 0.02;
  int onset_span = 5;

  void validate() const;
};

// Index of the first frame whose largest per-channel step against the frame
// onset_span positions earlier exceeds the threshold; nullopt if the stream
// never leaves standby.
std::optional<std::size_t> detect_onset(const std::vector<NormFrame>& frames,
                                        const CaptureConfig& cfg);

// Resamples a captured frame run onto window_instants uniformly spaced target
// times across [first_ts, last_ts] with linear interpolation.
GestureWindow capture_window(const std::vector<NormFrame>& frames,
                             const CaptureConfig& cfg);

// Standby -> onset -> capture state machine for live streams. Frames are
// pushed one at a time; a completed capture is handed back as the raw frame
// run (resample it with capture_window). Capture begins one frame before the
// onset trigger so the at-rest posture lands on instant zero.
class SignSegmenter {
 public:
  explicit SignSegmenter(const CaptureConfig& cfg);

  std::optional<std::vector<NormFrame>> push(const NormFrame& frame);
  // Stream ended: returns the in-flight capture if one was underway.
  std::optional<std::vector<NormFrame>> flush();
  bool capturing() const { return capturing_; }

 private:
  CaptureConfig cfg_;
  std::deque<NormFrame> recent_;
  std::vector<NormFrame> capture_;
  bool capturing_ = false;
};

// Pull-based source of frames from `file:<path>` or `tcp:<host>:<port>`.
// Malformed lines and timestamp regressions are skipped and counted; if more
// than 10% of a session of at least kQualityMinLines lines was malformed the
// end of the stream raises DataError.
class FrameSource {
 public:
  static constexpr std::size_t kQualityMinLines = 20;

  virtual ~FrameSource() = default;

  std::optional<SensorFrame> next();

  std::size_t line_count() const { return lines_; }
  std::size_t malformed_count() const { return malformed_; }

 protected:
  explicit FrameSource(int channels) : channels_(channels) {}
  // Next raw line without its terminator; nullopt at end of stream.
  virtual std::optional<std::string> next_line() = 0;

 private:
  int channels_;
  std::size_t lines_ = 0;
  std::size_t malformed_ = 0;
  bool has_prev_ts_ = false;
  bool quality_checked_ = false;
  std::uint64_t prev_ts_ = 0;
};

std::unique_ptr<FrameSource> open_stream(const std::string& source_spec,
                                         int channels = kDefaultChannels);

}  // namespace flexsign
