#include <algorithm>
#include <cmath>
#include <ostream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

double gini_impurity(const std::vector<int>& labels, const std::vector<std::size_t>& indices,
                     int classes) {
  if (indices.empty()) return 0.0;
  std::vector<int> counts(static_cast<std::size_t>(classes), 0);
  for (std::size_t i : indices) counts[static_cast<std::size_t>(labels[i])] += 1;
  double sum_sq = 0.0;
  const double n = static_cast<double>(indices.size());
  for (int c : counts) {
    const double p = c / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double midpoint_threshold(double lower, double upper) {
  const double mid = lower + (upper - lower) / 2.0;
  // With adjacent doubles the midpoint can round up onto `upper`; fall back to
  // `lower` so the <= comparison still separates the two values.
  if (mid >= upper) return lower;
  return mid;
}

SplitChoice best_split(const TrainMatrix& m, const std::vector<std::size_t>& indices,
                       const std::vector<int>& features) {
  SplitChoice best;
  const std::size_t n = indices.size();
  if (n < 2) return best;

  std::vector<std::pair<double, int>> column(n);  // (value, label), sorted per feature
  std::vector<int> left_counts(static_cast<std::size_t>(m.classes));
  std::vector<int> right_counts(static_cast<std::size_t>(m.classes));

  for (int f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = {m.row(indices[i])[f], m.y[indices[i]]};
    }
    std::sort(column.begin(), column.end());

    std::fill(left_counts.begin(), left_counts.end(), 0);
    std::fill(right_counts.begin(), right_counts.end(), 0);
    for (const auto& [v, label] : column) right_counts[static_cast<std::size_t>(label)] += 1;

    double left_sq = 0.0;  // sum of squared counts, updated incrementally
    double right_sq = 0.0;
    for (int c : right_counts) right_sq += static_cast<double>(c) * c;

    for (std::size_t i = 0; i + 1 < n; ++i) {
      const int label = column[i].second;
      // move sample i from the right partition to the left one
      left_sq += 2.0 * left_counts[static_cast<std::size_t>(label)] + 1.0;
      right_sq -= 2.0 * right_counts[static_cast<std::size_t>(label)] - 1.0;
      left_counts[static_cast<std::size_t>(label)] += 1;
      right_counts[static_cast<std::size_t>(label)] -= 1;

      if (column[i].first == column[i + 1].first) continue;  // no boundary here

      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      const double weighted =
          (nl * (1.0 - left_sq / (nl * nl)) + nr * (1.0 - right_sq / (nr * nr))) /
          static_cast<double>(n);
      if (!best.found || weighted < best.impurity) {
        best.found = true;
        best.feature = f;
        best.threshold = midpoint_threshold(column[i].first, column[i + 1].first);
        best.impurity = weighted;
      }
    }
  }
  return best;
}

namespace {

int majority_label(const std::vector<int>& labels, const std::vector<std::size_t>& indices,
                   int classes) {
  std::vector<int> counts(static_cast<std::size_t>(classes), 0);
  for (std::size_t i : indices) counts[static_cast<std::size_t>(labels[i])] += 1;
  return argmax_lowest(counts);
}

bool is_pure(const std::vector<int>& labels, const std::vector<std::size_t>& indices) {
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (labels[indices[i]] != labels[indices[0]]) return false;
  }
  return true;
}

std::vector<int> sample_features(int dim, int count, Rng& rng) {
  std::vector<int> all(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) all[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < count; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) + rng.next_below(static_cast<std::uint64_t>(dim - i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());  // scan order stays lowest-feature-first
  return all;
}

}  // namespace

DecisionTreeModel::DecisionTreeModel(const Vocabulary& vocab) { vocab_ = vocab; }

DecisionTreeModel::DecisionTreeModel(const TrainMatrix& m, const Vocabulary& vocab, int max_depth,
                                     int features_per_node, Rng* rng) {
  vocab_ = vocab;
  dim_ = m.dim;
  if (m.rows() == 0) throw DataError("cannot grow a tree from an empty matrix");
  if (features_per_node > 0 && rng == nullptr) {
    throw ModelError("per-node feature sampling needs a generator");
  }
  std::vector<std::size_t> indices(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) indices[i] = i;
  grow(m, indices, 0, max_depth, features_per_node, rng);
}

int DecisionTreeModel::grow(const TrainMatrix& m, std::vector<std::size_t>& indices, int depth,
                            int max_depth, int features_per_node, Rng* rng) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.push_back(TreeNode{});

  const bool depth_capped = max_depth > 0 && depth >= max_depth;
  if (indices.size() < 2 || depth_capped || is_pure(m.y, indices)) {
    nodes_[static_cast<std::size_t>(node_index)].label = majority_label(m.y, indices, m.classes);
    return node_index;
  }

  std::vector<int> features;
  if (features_per_node > 0 && features_per_node < m.dim) {
    features = sample_features(m.dim, features_per_node, *rng);
  } else {
    features.resize(static_cast<std::size_t>(m.dim));
    for (int f = 0; f < m.dim; ++f) features[static_cast<std::size_t>(f)] = f;
  }

  const SplitChoice split = best_split(m, indices, features);
  const double parent = gini_impurity(m.y, indices, m.classes);
  if (!split.found || !(split.impurity < parent)) {
    nodes_[static_cast<std::size_t>(node_index)].label = majority_label(m.y, indices, m.classes);
    return node_index;
  }

  std::vector<std::size_t> left_idx;
  std::vector<std::size_t> right_idx;
  for (std::size_t i : indices) {
    if (m.row(i)[split.feature] <= split.threshold) {
      left_idx.push_back(i);
    } else {
      right_idx.push_back(i);
    }
  }
  indices.clear();
  indices.shrink_to_fit();  // recursion depth times row count stays bounded

  nodes_[static_cast<std::size_t>(node_index)].feature = split.feature;
  nodes_[static_cast<std::size_t>(node_index)].threshold = split.threshold;
  const int left = grow(m, left_idx, depth + 1, max_depth, features_per_node, rng);
  nodes_[static_cast<std::size_t>(node_index)].left = left;
  const int right = grow(m, right_idx, depth + 1, max_depth, features_per_node, rng);
  nodes_[static_cast<std::size_t>(node_index)].right = right;
  return node_index;
}

int DecisionTreeModel::predict_impl(const double* features) const {
  int node = 0;
  while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
    node = features[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(node)].label;
}

void DecisionTreeModel::save_payload(std::ostream& out) const {
  out << "nodes " << nodes_.size() << "\n";
  for (const TreeNode& n : nodes_) {
    if (n.feature < 0) {
      out << "leaf " << n.label << "\n";
    } else {
      out << "split " << n.feature << " " << format_real(n.threshold) << " " << n.left << " "
          << n.right << "\n";
    }
  }
}

}  // namespace flexsign
