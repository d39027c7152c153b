#include "flexsign/cleaning.hpp"

#include <cmath>
#include <sstream>

#include "flexsign/errors.hpp"

namespace flexsign {

void CleaningConfig::validate() const {
  if (!(jump_threshold > 0.0)) throw DataError("jump_threshold must be positive");
  if (max_spike_len < 1) throw DataError("max_spike_len must be at least 1");
}

namespace {

// All maximal deviation runs of a channel, regardless of length.
std::vector<SpikeRun> deviation_runs(std::span<const double> signal,
                                     const CleaningConfig& cfg) {
  std::vector<SpikeRun> runs;
  const int n = static_cast<int>(signal.size());
  double base = signal[0];  // the first instant anchors the trusted level
  int t = 1;
  while (t < n) {
    if (std::abs(signal[static_cast<std::size_t>(t)] - base) > cfg.jump_threshold) {
      const int start = t;
      while (t < n && std::abs(signal[static_cast<std::size_t>(t)] - base) > cfg.jump_threshold)
        ++t;
      runs.push_back({start, t - start});  // closed by a return edge or the end
    } else {
      base = signal[static_cast<std::size_t>(t)];
      ++t;
    }
  }
  return runs;
}

}  // namespace

std::vector<SpikeRun> detect_spikes(std::span<const double> signal,
                                    const CleaningConfig& cfg) {
  cfg.validate();
  if (signal.size() < 3) throw DataError("spike detection needs at least 3 instants");
  std::vector<SpikeRun> spikes;
  for (const SpikeRun& run : deviation_runs(signal, cfg))
    if (run.length <= cfg.max_spike_len) spikes.push_back(run);
  return spikes;
}

RepairOutcome repair_sample(const GestureWindow& w, const CleaningConfig& cfg) {
  cfg.validate();
  if (w.instants() < 3) throw DataError("repair needs at least 3 instants");

  const int T = w.instants();
  const int C = w.channels();

  // First pass: any over-long deviation on any channel quarantines the window.
  std::vector<std::vector<SpikeRun>> channel_runs(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    std::vector<double> signal(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) signal[static_cast<std::size_t>(t)] = w.at(t, c);
    channel_runs[static_cast<std::size_t>(c)] = deviation_runs(signal, cfg);
    for (const SpikeRun& run : channel_runs[static_cast<std::size_t>(c)])
      if (run.length > cfg.max_spike_len)
        return {w, Quality::quarantined, 0};
  }

  RepairOutcome out{w, Quality::clean, 0};
  for (int c = 0; c < C; ++c) {
    for (const SpikeRun& run : channel_runs[static_cast<std::size_t>(c)]) {
      // neighbors are original values: runs never touch instant 0, and the
      // value after a run is within threshold of the base by construction
      const double left = w.at(run.start - 1, c);
      const int after = run.start + run.length;
      const double fill = after < T ? 0.5 * (left + w.at(after, c)) : left;
      for (int t = run.start; t < after; ++t) out.window.set(t, c, fill);
      out.repaired_instants += run.length;
    }
  }
  if (out.repaired_instants > 0) out.quality = Quality::repaired;
  return out;
}

std::pair<Dataset, CleaningReport> clean_dataset(const Dataset& d,
                                                 const CleaningConfig& cfg) {
  cfg.validate();
  d.validate();

  Dataset out;
  out.vocabulary = d.vocabulary;
  out.meta = d.meta;
  CleaningReport report;

  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const LabeledSample& s = d.samples[i];
    RepairOutcome r = repair_sample(s.window, cfg);
    report.outcomes.push_back({i, r.quality, r.repaired_instants});
    switch (r.quality) {
      case Quality::quarantined:
        ++report.quarantined;
        break;  // dropped from the output set, kept in the report
      case Quality::repaired:
        ++report.repaired;
        out.samples.push_back({std::move(r.window), s.label, Quality::repaired});
        break;
      case Quality::clean:
        ++report.clean;
        // a sample already flagged repaired upstream keeps that flag
        out.samples.push_back({std::move(r.window), s.label, s.quality});
        break;
    }
  }
  return {std::move(out), std::move(report)};
}

void write_cleaning_report_csv(const CleaningReport& report, const std::string& path) {
  std::ostringstream ss;
  ss << "index,quality,repaired_instants\n";
  for (const auto& o : report.outcomes)
    ss << o.index << ',' << quality_name(o.quality) << ',' << o.repaired_instants << '\n';
  write_file_atomic(path, ss.str());
}

std::string cleaning_summary(const CleaningReport& report) {
  std::ostringstream ss;
  ss << "samples " << report.total() << ": clean " << report.clean << ", repaired "
     << report.repaired << ", quarantined " << report.quarantined;
  return ss.str();
}

}  // namespace flexsign
