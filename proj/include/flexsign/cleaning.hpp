#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flexsign/core.hpp"

namespace flexsign {

struct CleaningConfig {
  // A jump larger than this against the last retained value opens a spike run.
  double jump_threshold = 0.25;
  // Runs longer than this are treated as real discontinuities, not spikes.
  int max_spike_len = 1;

  void validate() const;
};

struct SpikeRun {
  int start = 0;
  int length = 0;

  bool operator==(const SpikeRun&) const = default;
};

// Maximal runs of consecutive instants that deviate from the last retained
// value by more than the threshold and return within it afterwards (or hit
// the end of the signal). Only runs of at most max_spike_len instants are
// spikes; longer deviations are reported by repair_sample as quarantine.
// Differencing against the last retained value keeps a spike from masking
// its own return edge.
std::vector<SpikeRun> detect_spikes(std::span<const double> signal,
                                    const CleaningConfig& cfg);

struct RepairOutcome {
  GestureWindow window;
  Quality quality = Quality::clean;
  int repaired_instants = 0;
};

// Replaces every spike instant with the mean of the nearest retained
// neighbors on each side (one-sided copy at the signal boundary). A deviation
// run longer than max_spike_len on any channel quarantines the whole window,
// returned untouched. Repair is idempotent.
RepairOutcome repair_sample(const GestureWindow& w, const CleaningConfig& cfg);

struct SampleOutcome {
  std::size_t index = 0;
  Quality quality = Quality::clean;
  int repaired_instants = 0;
};

struct CleaningReport {
  std::size_t clean = 0;
  std::size_t repaired = 0;
  std::size_t quarantined = 0;
  std::vector<SampleOutcome> outcomes;

  std::size_t total() const { return clean + repaired + quarantined; }
};

// Repairs every sample; quarantined samples are dropped from the returned
// dataset (they stay visible in the report by input index).
std::pair<Dataset, CleaningReport> clean_dataset(const Dataset& d,
                                                 const CleaningConfig& cfg);

void write_cleaning_report_csv(const CleaningReport& report, const std::string& path);
std::string cleaning_summary(const CleaningReport& report);

}  // namespace flexsign
