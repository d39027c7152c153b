#include <algorithm>
#include <ostream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

KnnModel::KnnModel(const Vocabulary& vocab, int k) : k_(k) { vocab_ = vocab; }

KnnModel::KnnModel(const TrainMatrix& m, const Vocabulary& vocab, int k) : k_(k), train_(m) {
  if (k < 1) throw DataError("neighbor count must be >= 1");
  if (m.rows() == 0) throw DataError("neighbor model needs at least one training sample");
  vocab_ = vocab;
  dim_ = m.dim;
}

ClassifierKind KnnModel::kind() const {
  return k_ == 3 ? ClassifierKind::knn3 : ClassifierKind::knn5;
}

int KnnModel::predict_impl(const double* features) const {
  const std::size_t n = train_.rows();
  // (squared distance, training row); the row index makes ordering total, so
  // equal distances rank deterministically by position in the training set.
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = train_.row(i);
    double d2 = 0.0;
    for (int f = 0; f < dim_; ++f) {
      const double diff = features[f] - r[f];
      d2 += diff * diff;
    }
    order[i] = {d2, i};
  }
  const std::size_t k = std::min(static_cast<std::size_t>(k_), n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

  std::vector<int> counts(static_cast<std::size_t>(train_.classes), 0);
  for (std::size_t i = 0; i < k; ++i) {
    counts[static_cast<std::size_t>(train_.y[order[i].second])] += 1;
  }
  int best = 0;
  for (int c : counts) best = std::max(best, c);
  // Tied vote: the closest neighbor belonging to a tied class decides.
  for (std::size_t i = 0; i < k; ++i) {
    const int label = train_.y[order[i].second];
    if (counts[static_cast<std::size_t>(label)] == best) return label;
  }
  return 0;  // unreachable: k >= 1
}

void KnnModel::save_payload(std::ostream& out) const {
  out << "k " << k_ << "\n";
  out << "rows " << train_.rows() << "\n";
  for (std::size_t i = 0; i < train_.rows(); ++i) {
    out << train_.y[i];
    const double* r = train_.row(i);
    for (int f = 0; f < dim_; ++f) out << " " << format_real(r[f]);
    out << "\n";
  }
}

}  // namespace flexsign
