#include <cmath>
#include <ostream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

RandomForestModel::RandomForestModel(const Vocabulary& vocab) { vocab_ = vocab; }

RandomForestModel::RandomForestModel(const TrainMatrix& m, const Vocabulary& vocab,
                                     const TrainOptions& opt) {
  vocab_ = vocab;
  dim_ = m.dim;
  if (m.rows() == 0) throw DataError("cannot grow a forest from an empty matrix");

  int features_per_node = opt.rf_features_per_node;
  if (features_per_node == 0) {
    features_per_node = static_cast<int>(std::floor(std::sqrt(static_cast<double>(m.dim))));
    if (features_per_node < 1) features_per_node = 1;
  }

  trees_.reserve(static_cast<std::size_t>(opt.rf_trees));
  for (int t = 0; t < opt.rf_trees; ++t) {
    // One generator per tree, derived from the run seed, so any single tree
    // can be rebuilt without replaying the ones before it.
    Rng rng(Rng::derive(opt.seed, static_cast<std::uint64_t>(t)));

    if (opt.rf_bootstrap) {
      TrainMatrix boot;
      boot.dim = m.dim;
      boot.classes = m.classes;
      boot.x.reserve(m.x.size());
      boot.y.reserve(m.y.size());
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const std::size_t pick = rng.next_below(m.rows());
        boot.x.insert(boot.x.end(), m.row(pick), m.row(pick) + m.dim);
        boot.y.push_back(m.y[pick]);
      }
      trees_.emplace_back(boot, vocab, opt.rf_max_depth, features_per_node, &rng);
    } else {
      trees_.emplace_back(m, vocab, opt.rf_max_depth, features_per_node, &rng);
    }
  }
}

int RandomForestModel::predict_impl(const double* features) const {
  std::vector<int> votes(static_cast<std::size_t>(vocab_.size()), 0);
  for (const DecisionTreeModel& tree : trees_) {
    votes[static_cast<std::size_t>(tree.predict_raw(features))] += 1;
  }
  return argmax_lowest(votes);
}

void RandomForestModel::save_payload(std::ostream& out) const {
  out << "trees " << trees_.size() << "\n";
  for (const DecisionTreeModel& tree : trees_) tree.save_payload(out);
}

}  // namespace flexsign
