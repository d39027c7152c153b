#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flexsign/acquisition.hpp"
#include "flexsign/core.hpp"
#include "flexsign/rng.hpp"

namespace flexsign {

struct Keypoint {
  double phase = 0.0;  // position within the gesture, 0..1
  double value = 0.0;  // normalized sensor level

  bool operator==(const Keypoint&) const = default;
};

// Piecewise-linear trajectory of one sign: one keypoint list per channel.
// Phases are strictly increasing from exactly 0 to exactly 1 per channel.
struct SignTemplate {
  std::string notation;
  std::vector<std::vector<Keypoint>> channels;

  void validate() const;

  bool operator==(const SignTemplate&) const = default;
};

struct GenConfig {
  std::uint64_t seed = 42;
  int samples_per_class = 45;
  double amp_noise_sd = 0.03;   // per-instant Gaussian amplitude noise
  double time_jitter_sd = 0.02; // per-keypoint Gaussian phase jitter
  double offset_sd = 0.02;      // per-channel Gaussian level offset
  double spike_prob = 0.0;      // per-instant chance of a sensor spike
  double dropout_prob = 0.0;    // per-sample chance of a pinned-rail run

  void validate() const;
};

// The built-in 23-sign vocabulary and its trajectory templates.
std::pair<Vocabulary, std::vector<SignTemplate>> make_default_vocabulary();
const std::string& default_templates_text();

// Noise-free evaluation of a template at `instants` uniform phases.
GestureWindow render_template(const SignTemplate& t, int instants = kDefaultInstants);

// One noisy sample. The per-sample seed fans out into independent draws for
// jitter, offset, amplitude noise, spikes and dropout, so turning one effect
// off never shifts the others.
LabeledSample synthesize_sample(const SignTemplate& t, int label, const GenConfig& cfg,
                                std::uint64_t sample_seed, int instants = kDefaultInstants);

// samples_per_class draws of every sign; per-class seeds are seed XOR class
// index so any class can be regenerated independently.
Dataset synthesize_dataset(const Vocabulary& v, const std::vector<SignTemplate>& ts,
                           const GenConfig& cfg, int instants = kDefaultInstants);

// Near-even split of `total` samples: total/K per class, the first total%K
// classes get one extra.
Dataset synthesize_dataset_total(const Vocabulary& v, const std::vector<SignTemplate>& ts,
                                 const GenConfig& cfg, int total,
                                 int instants = kDefaultInstants);

struct StreamConfig {
  double frame_rate_hz = 10.0;
  double standby_ms = 1000.0;
  double capture_ms = 1900.0;

  void validate() const;
};

// Wire frames for one signed gesture: quiescent standby frames at the sign's
// start posture, then the (possibly noisy) trajectory sampled at the frame
// rate across capture_ms. Timestamps begin at t0_ms.
std::vector<SensorFrame> stream_sign(const SignTemplate& t, const GenConfig& cfg,
                                     const StreamConfig& sc, std::uint64_t sample_seed,
                                     std::uint64_t t0_ms = 0);

// Template file: `sign <notation>` followed by one keypoint line per channel.
std::vector<SignTemplate> parse_templates(std::istream& in, const std::string& name);
std::vector<SignTemplate> read_templates_file(const std::string& path);
void write_templates_file(const std::vector<SignTemplate>& ts, const std::string& path);
Vocabulary vocabulary_of(const std::vector<SignTemplate>& ts);

}  // namespace flexsign
