#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace flexsign {

// Sensor channels in storage order. The glove carries one flex sensor on the
// elbow, one on the thumb and one on the middle finger; every window, CSV
// column block and template file follows this order.
inline constexpr int kAdcFullScale = 1023;  // 10-bit ADC
inline constexpr int kDefaultInstants = 19;
inline constexpr int kDefaultChannels = 3;
inline constexpr const char* kChannelNames[] = {"elbow", "thumb", "middle"};

const char* channel_name(int channel);

// Maps a raw ADC count (0..1023) onto [0, 1]. Out-of-range input signals a
// corrupted frame and throws DataError.
double normalize_reading(int raw);

// Nearest ADC count for a normalized value in [0, 1].
int to_adc(double value);

// Ordered list of sign notations. Order is significant: the position of a
// notation is its label index in datasets and models.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> signs);

  int size() const { return static_cast<int>(signs_.size()); }
  const std::string& notation(int label) const;
  const std::vector<std::string>& signs() const { return signs_; }
  // Label index for a notation, -1 if unknown.
  int index_of(const std::string& notation) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> signs_;
};

// One captured gesture: `instants` time steps by `channels` normalized sensor
// values, stored instant-major (values()[t * channels + c]).
class GestureWindow {
 public:
  GestureWindow() = default;
  GestureWindow(int instants, int channels);
  GestureWindow(int instants, int channels, std::vector<double> values);

  int instants() const { return instants_; }
  int channels() const { return channels_; }
  double at(int instant, int channel) const;
  void set(int instant, int channel, double value);
  const std::vector<double>& values() const { return values_; }

  bool operator==(const GestureWindow&) const = default;

 private:
  int instants_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

// Feature vector for the classifiers: instant-major flattening, so element
// i*channels + c is instant i of channel c.
std::vector<double> flatten_window(const GestureWindow& w);
GestureWindow window_from_flat(int instants, int channels,
                               const std::vector<double>& flat);

enum class Quality { clean, repaired, quarantined };

const char* quality_name(Quality q);
Quality quality_from_name(const std::string& name);

struct LabeledSample {
  GestureWindow window;
  int label = 0;
  Quality quality = Quality::clean;

  bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
  Vocabulary vocabulary;
  std::vector<LabeledSample> samples;
  std::string meta;  // free-form provenance, single line

  // Uniform window shape, labels in range, vocabulary usable. Throws DataError.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

// Fisher-Yates shuffle of [0, n) under the pinned generator, then a prefix
// cut: |train| = floor(ratio * n). Degenerate splits (empty side) throw.
SplitIndices shuffle_split(std::size_t n, double ratio, std::uint64_t seed);

// Dataset CSV with embedded vocabulary and channel order; see README for the
// exact layout. Reals are written with enough digits to round-trip exactly.
Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& d, const std::string& path);
Dataset read_dataset_stream(std::istream& in, const std::string& name);
void write_dataset_stream(const Dataset& d, std::ostream& out);

// Reads only the windows of a dataset CSV; the label column may hold "?" for
// unlabeled prediction input.
std::vector<GestureWindow> read_windows(const std::string& path);

// One notation per line, order significant.
Vocabulary read_vocabulary_file(const std::string& path);
void write_vocabulary_file(const Vocabulary& v, const std::string& path);

// Shortest decimal form that parses back to exactly the same double.
std::string format_real(double v);
double parse_real(const std::string& token, const std::string& where);

// Writes `content` to `path` through a temporary file and an atomic rename so
// failed runs never leave partial artifacts behind.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace flexsign
