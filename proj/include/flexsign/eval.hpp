#pragma once

#include <string>
#include <vector>

#include "flexsign/core.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

// Rows are the actual class, columns the predicted class; every artifact that
// serializes a matrix states this orientation in its header.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<long long> counts;  // classes x classes, row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int k) : classes(k), counts(static_cast<std::size_t>(k) * k, 0) {}

  long long& at(int actual, int predicted) {
    return counts[static_cast<std::size_t>(actual) * classes + predicted];
  }
  long long at(int actual, int predicted) const {
    return counts[static_cast<std::size_t>(actual) * classes + predicted];
  }
  long long total() const;
  long long diagonal() const;
  long long row_sum(int c) const;
  long long col_sum(int c) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix make_confusion(const std::vector<int>& actual, const std::vector<int>& predicted,
                               int classes);
// Confusion of a model over a dataset; quarantined samples are excluded, the
// same way training excludes them.
ConfusionMatrix confusion(const Dataset& test, const Model& m);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support = 0;
  // False when the denominator was zero (class never predicted / no support);
  // the metric value is reported as 0 in that case.
  bool precision_defined = true;
  bool recall_defined = true;

  bool operator==(const ClassMetrics&) const = default;
};

struct EvalReport {
  std::string model;  // classifier short name, empty for bare matrices
  bool non_converged = false;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  long long total = 0;

  bool operator==(const EvalReport&) const = default;
};

// All metric fields from a confusion matrix. Throws DataError on an empty one.
EvalReport metrics(const ConfusionMatrix& cm);
// confusion + metrics + model kind and convergence echo in one step.
EvalReport evaluate(const Dataset& test, const Model& m);

// Human-readable, machine-parseable report; numbers carry full precision so
// a read-back report compares equal.
void write_report(const EvalReport& r, const Vocabulary& v, const std::string& path);
EvalReport read_report(const std::string& path, Vocabulary* vocab_out = nullptr);

void write_confusion_csv(const ConfusionMatrix& cm, const Vocabulary& v, const std::string& path);
ConfusionMatrix read_confusion_csv(const std::string& path, Vocabulary* vocab_out = nullptr);
// Heatmap: one shaded cell per (actual, predicted) pair, labeled both ways.
void write_confusion_svg(const ConfusionMatrix& cm, const Vocabulary& v, const std::string& path);

// Trajectory artifacts for one captured window:
//   <prefix>_series.csv   - instant,elbow,thumb,middle (one row per instant)
//   <prefix>_polyline.csv - x,y,z points (the three channel values per instant)
void render_trajectory(const GestureWindow& w, const std::string& prefix);
void render_trajectories(const std::vector<GestureWindow>& windows, const std::string& prefix);

// One-line human summary ("accuracy 97.1% over 209 samples, ...").
std::string report_summary(const EvalReport& r);

}  // namespace flexsign
