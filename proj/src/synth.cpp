#include "flexsign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flexsign/errors.hpp"

namespace flexsign {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double eval_keypoints(const std::vector<Keypoint>& pts, double phase) {
  if (phase <= pts.front().phase) return pts.front().value;
  if (phase >= pts.back().phase) return pts.back().value;
  auto hi = std::upper_bound(pts.begin(), pts.end(), phase,
                             [](double p, const Keypoint& k) { return p < k.phase; });
  // hi is the first keypoint past `phase`; with duplicated phases (possible
  // after jitter clamping) the last keypoint of the equal group anchors the
  // segment, so evaluation stays well defined.
  const Keypoint& b = *hi;
  const Keypoint& a = *(hi - 1);
  const double u = (phase - a.phase) / (b.phase - a.phase);
  return a.value + (b.value - a.value) * u;
}

// A concrete draw of a template: jittered keypoint phases plus a per-channel
// baseline offset. Built once per sample so the standby posture and the
// captured trajectory of a streamed sign agree with each other.
struct Trajectory {
  std::vector<std::vector<Keypoint>> channels;
  std::vector<double> offsets;
};

Trajectory make_trajectory(const SignTemplate& t, const GenConfig& cfg, Rng& jitter_rng,
                           Rng& offset_rng) {
  Trajectory traj;
  traj.channels = t.channels;
  for (auto& pts : traj.channels) {
    for (auto& kp : pts) {
      kp.phase = std::clamp(kp.phase + cfg.time_jitter_sd * jitter_rng.next_gaussian(), 0.0, 1.0);
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const Keypoint& a, const Keypoint& b) { return a.phase < b.phase; });
  }
  traj.offsets.resize(traj.channels.size());
  for (auto& off : traj.offsets) off = cfg.offset_sd * offset_rng.next_gaussian();
  return traj;
}

// Instant-major values for `instants` uniform phases, with amplitude noise,
// spikes and dropout applied in that order. Each effect consumes only its own
// generator, so disabling one never shifts another's draws.
std::vector<double> sample_values(const Trajectory& traj, const GenConfig& cfg, int instants,
                                  Rng& noise_rng, Rng& spike_rng, Rng& dropout_rng) {
  const int channels = static_cast<int>(traj.channels.size());
  std::vector<double> values(static_cast<std::size_t>(instants) * channels);
  for (int i = 0; i < instants; ++i) {
    const double phase = static_cast<double>(i) / (instants - 1);
    for (int c = 0; c < channels; ++c) {
      double v = eval_keypoints(traj.channels[c], phase) + traj.offsets[c] +
                 cfg.amp_noise_sd * noise_rng.next_gaussian();
      values[static_cast<std::size_t>(i) * channels + c] = clamp01(v);
    }
  }

  for (int i = 0; i < instants; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (spike_rng.next_double() >= cfg.spike_prob) continue;
      double& v = values[static_cast<std::size_t>(i) * channels + c];
      const double up = 1.0 - v;
      const double down = v;
      // Jump at least half scale toward whichever rail has the room; the
      // magnitude never overshoots [0, 1].
      const double head = std::max(up, down);
      const double mag = 0.5 + spike_rng.next_double() * (head - 0.5);
      v += (up >= down) ? mag : -mag;
    }
  }

  if (dropout_rng.next_double() < cfg.dropout_prob && instants >= 3) {
    const int c = static_cast<int>(dropout_rng.next_below(static_cast<std::uint64_t>(channels)));
    int len = 3 + static_cast<int>(dropout_rng.next_below(3));
    if (len > instants) len = instants;
    const int start =
        static_cast<int>(dropout_rng.next_below(static_cast<std::uint64_t>(instants - len + 1)));
    double mean = 0.0;
    for (int i = 0; i < instants; ++i) mean += values[static_cast<std::size_t>(i) * channels + c];
    mean /= instants;
    const double rail = mean <= 0.5 ? 1.0 : 0.0;  // the sensor saturates at the far rail
    for (int i = start; i < start + len; ++i) {
      values[static_cast<std::size_t>(i) * channels + c] = rail;
    }
  }
  return values;
}

struct SampleRngs {
  Rng jitter, offset, noise, spike, dropout;
};

SampleRngs rngs_for(std::uint64_t sample_seed) {
  return SampleRngs{Rng(Rng::derive(sample_seed, 1)), Rng(Rng::derive(sample_seed, 2)),
                    Rng(Rng::derive(sample_seed, 3)), Rng(Rng::derive(sample_seed, 4)),
                    Rng(Rng::derive(sample_seed, 5))};
}

bool valid_notation(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch <= ' ' || ch > '~' || ch == ',') return false;
  }
  return true;
}

}  // namespace

void SignTemplate::validate() const {
  if (!valid_notation(notation)) {
    throw DataError("template notation '" + notation + "' is not a printable token");
  }
  if (static_cast<int>(channels.size()) != kDefaultChannels) {
    throw DataError("template '" + notation + "' must define " +
                    std::to_string(kDefaultChannels) + " channels");
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& pts = channels[c];
    const std::string where = "template '" + notation + "' channel " + channel_name(static_cast<int>(c));
    if (pts.size() < 2) throw DataError(where + ": needs at least 2 keypoints");
    if (pts.front().phase != 0.0) throw DataError(where + ": first keypoint must be at phase 0");
    if (pts.back().phase != 1.0) throw DataError(where + ": last keypoint must be at phase 1");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!(pts[k].value >= 0.0 && pts[k].value <= 1.0)) {
        throw DataError(where + ": keypoint value out of [0, 1]");
      }
      if (k > 0 && !(pts[k].phase > pts[k - 1].phase)) {
        throw DataError(where + ": keypoint phases must be strictly increasing");
      }
    }
  }
}

void GenConfig::validate() const {
  if (samples_per_class < 1) throw DataError("samples per class must be at least 1");
  auto check_sd = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(std::string(name) + " must be in [0, 1]");
  };
  check_sd(amp_noise_sd, "amplitude noise");
  check_sd(time_jitter_sd, "time jitter");
  check_sd(offset_sd, "channel offset");
  check_sd(spike_prob, "spike probability");
  check_sd(dropout_prob, "dropout probability");
}

void StreamConfig::validate() const {
  if (!(frame_rate_hz > 0.0 && frame_rate_hz <= 1000.0)) {
    throw DataError("frame rate must be in (0, 1000] Hz");
  }
  if (!(standby_ms >= 0.0)) throw DataError("standby duration must be >= 0");
  if (!(capture_ms > 0.0)) throw DataError("capture duration must be > 0");
  if (std::llround(capture_ms * frame_rate_hz / 1000.0) < 2) {
    throw DataError("capture duration must cover at least 2 frames");
  }
}

GestureWindow render_template(const SignTemplate& t, int instants) {
  t.validate();
  if (instants < 2) throw DataError("rendering needs at least 2 instants");
  const int channels = static_cast<int>(t.channels.size());
  GestureWindow w(instants, channels);
  for (int i = 0; i < instants; ++i) {
    const double phase = static_cast<double>(i) / (instants - 1);
    for (int c = 0; c < channels; ++c) {
      w.set(i, c, eval_keypoints(t.channels[c], phase));
    }
  }
  return w;
}

LabeledSample synthesize_sample(const SignTemplate& t, int label, const GenConfig& cfg,
                                std::uint64_t sample_seed, int instants) {
  t.validate();
  cfg.validate();
  if (instants < 2) throw DataError("synthesis needs at least 2 instants");
  SampleRngs r = rngs_for(sample_seed);
  const Trajectory traj = make_trajectory(t, cfg, r.jitter, r.offset);
  std::vector<double> values = sample_values(traj, cfg, instants, r.noise, r.spike, r.dropout);
  LabeledSample s;
  s.window = GestureWindow(instants, static_cast<int>(t.channels.size()), std::move(values));
  s.label = label;
  s.quality = Quality::clean;
  return s;
}

namespace {

std::string gen_meta(const GenConfig& cfg, const std::string& counts) {
  std::ostringstream out;
  out << "generator seed=" << cfg.seed << " " << counts << " amp=" << format_real(cfg.amp_noise_sd)
      << " jitter=" << format_real(cfg.time_jitter_sd) << " offset=" << format_real(cfg.offset_sd)
      << " spike=" << format_real(cfg.spike_prob) << " dropout=" << format_real(cfg.dropout_prob);
  return out.str();
}

Dataset synthesize_counts(const Vocabulary& v, const std::vector<SignTemplate>& ts,
                          const GenConfig& cfg, const std::vector<int>& counts, int instants,
                          const std::string& counts_desc) {
  if (static_cast<int>(ts.size()) != v.size()) {
    throw DataError("template list does not match vocabulary size");
  }
  for (int k = 0; k < v.size(); ++k) {
    if (ts[static_cast<std::size_t>(k)].notation != v.notation(k)) {
      throw DataError("template order does not match vocabulary: expected '" + v.notation(k) +
                      "', got '" + ts[static_cast<std::size_t>(k)].notation + "'");
    }
  }
  Dataset d;
  d.vocabulary = v;
  d.meta = gen_meta(cfg, counts_desc);
  for (int k = 0; k < v.size(); ++k) {
    // Each class draws from its own seed so one class can be regenerated (or
    // appended) without disturbing any other.
    const std::uint64_t class_seed = cfg.seed ^ static_cast<std::uint64_t>(k);
    for (int i = 0; i < counts[static_cast<std::size_t>(k)]; ++i) {
      const std::uint64_t sample_seed = Rng::derive(class_seed, static_cast<std::uint64_t>(i));
      d.samples.push_back(
          synthesize_sample(ts[static_cast<std::size_t>(k)], k, cfg, sample_seed, instants));
    }
  }
  d.validate();
  return d;
}

}  // namespace

Dataset synthesize_dataset(const Vocabulary& v, const std::vector<SignTemplate>& ts,
                           const GenConfig& cfg, int instants) {
  cfg.validate();
  std::vector<int> counts(static_cast<std::size_t>(v.size()), cfg.samples_per_class);
  return synthesize_counts(v, ts, cfg, counts, instants,
                           "per_class=" + std::to_string(cfg.samples_per_class));
}

Dataset synthesize_dataset_total(const Vocabulary& v, const std::vector<SignTemplate>& ts,
                                 const GenConfig& cfg, int total, int instants) {
  cfg.validate();
  if (v.size() == 0) throw DataError("vocabulary is empty");
  if (total < v.size()) throw DataError("total sample count smaller than the vocabulary");
  const int base = total / v.size();
  const int extra = total % v.size();
  std::vector<int> counts(static_cast<std::size_t>(v.size()), base);
  for (int k = 0; k < extra; ++k) counts[static_cast<std::size_t>(k)] += 1;
  return synthesize_counts(v, ts, cfg, counts, instants, "total=" + std::to_string(total));
}

std::vector<SensorFrame> stream_sign(const SignTemplate& t, const GenConfig& cfg,
                                     const StreamConfig& sc, std::uint64_t sample_seed,
                                     std::uint64_t t0_ms) {
  t.validate();
  cfg.validate();
  sc.validate();
  const int channels = static_cast<int>(t.channels.size());
  const int standby_n = static_cast<int>(std::llround(sc.standby_ms * sc.frame_rate_hz / 1000.0));
  const int sign_n = static_cast<int>(std::llround(sc.capture_ms * sc.frame_rate_hz / 1000.0));

  SampleRngs r = rngs_for(sample_seed);
  const Trajectory traj = make_trajectory(t, cfg, r.jitter, r.offset);
  const std::vector<double> values = sample_values(traj, cfg, sign_n, r.noise, r.spike, r.dropout);

  auto frame_ts = [&](int i) {
    return t0_ms + static_cast<std::uint64_t>(std::llround(i * 1000.0 / sc.frame_rate_hz));
  };

  std::vector<SensorFrame> frames;
  frames.reserve(static_cast<std::size_t>(standby_n + sign_n));
  // Standby: the hand holds the sign's start posture, so the wire shows a
  // steady level and the first captured frame matches it.
  std::vector<int> rest(static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    rest[static_cast<std::size_t>(c)] =
        to_adc(clamp01(eval_keypoints(traj.channels[static_cast<std::size_t>(c)], 0.0) +
                       traj.offsets[static_cast<std::size_t>(c)]));
  }
  for (int i = 0; i < standby_n; ++i) {
    frames.push_back(SensorFrame{frame_ts(i), rest});
  }
  for (int j = 0; j < sign_n; ++j) {
    SensorFrame f;
    f.timestamp_ms = frame_ts(standby_n + j);
    f.readings.resize(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
      f.readings[static_cast<std::size_t>(c)] =
          to_adc(values[static_cast<std::size_t>(j) * channels + c]);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::vector<SignTemplate> parse_templates(std::istream& in, const std::string& name) {
  auto fail = [&](int line_no, const std::string& what) -> void {
    throw DataError(name + " line " + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) fail(1, "empty template file");
  ++line_no;
  if (line == "# flexsign-templates v1\r") line.pop_back();
  if (line != "# flexsign-templates v1") {
    fail(line_no, "expected version line '# flexsign-templates v1'");
  }

  std::vector<SignTemplate> out;
  SignTemplate current;
  int channel_index = -1;  // -1: outside a sign block

  auto finish_block = [&](int at_line) {
    if (channel_index < 0) return;
    if (channel_index != kDefaultChannels) {
      fail(at_line, "sign '" + current.notation + "' has " + std::to_string(channel_index) +
                        " channel lines, expected " + std::to_string(kDefaultChannels));
    }
    try {
      current.validate();
    } catch (const DataError& e) {
      fail(at_line, e.what());
    }
    out.push_back(std::move(current));
    current = SignTemplate{};
    channel_index = -1;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "sign") {
      finish_block(line_no);
      if (toks.size() != 2) fail(line_no, "expected 'sign <notation>'");
      current.notation = toks[1];
      channel_index = 0;
      continue;
    }
    if (channel_index < 0) fail(line_no, "expected 'sign <notation>' before channel data");
    if (channel_index >= kDefaultChannels) {
      fail(line_no, "too many channel lines for sign '" + current.notation + "'");
    }
    if (toks[0] != channel_name(channel_index)) {
      fail(line_no, std::string("expected channel '") + channel_name(channel_index) + "', got '" +
                        toks[0] + "'");
    }
    std::vector<Keypoint> pts;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const std::string& tok = toks[i];
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos) fail(line_no, "keypoint '" + tok + "' is not phase:value");
      Keypoint kp;
      const std::string where = name + " line " + std::to_string(line_no);
      kp.phase = parse_real(tok.substr(0, colon), where);
      kp.value = parse_real(tok.substr(colon + 1), where);
      pts.push_back(kp);
    }
    current.channels.push_back(std::move(pts));
    ++channel_index;
  }
  finish_block(line_no);

  if (out.empty()) fail(line_no, "no sign blocks found");
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[i].notation == out[j].notation) {
        throw DataError(name + ": duplicate sign '" + out[i].notation + "'");
      }
    }
  }
  return out;
}

std::vector<SignTemplate> read_templates_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template file: " + path);
  return parse_templates(in, path);
}

void write_templates_file(const std::vector<SignTemplate>& ts, const std::string& path) {
  std::ostringstream out;
  out << "# flexsign-templates v1\n";
  for (const auto& t : ts) {
    t.validate();
    out << "\nsign " << t.notation << "\n";
    for (std::size_t c = 0; c < t.channels.size(); ++c) {
      out << channel_name(static_cast<int>(c));
      for (const Keypoint& kp : t.channels[c]) {
        out << " " << format_real(kp.phase) << ":" << format_real(kp.value);
      }
      out << "\n";
    }
  }
  write_file_atomic(path, out.str());
}

Vocabulary vocabulary_of(const std::vector<SignTemplate>& ts) {
  std::vector<std::string> names;
  names.reserve(ts.size());
  for (const auto& t : ts) names.push_back(t.notation);
  Vocabulary v(std::move(names));
  return v;
}

std::pair<Vocabulary, std::vector<SignTemplate>> make_default_vocabulary() {
  static const std::pair<Vocabulary, std::vector<SignTemplate>> built = [] {
    std::istringstream in(default_templates_text());
    std::vector<SignTemplate> ts = parse_templates(in, "built-in templates");
    Vocabulary v = vocabulary_of(ts);
    return std::make_pair(std::move(v), std::move(ts));
  }();
  return built;
}

}  // namespace flexsign
