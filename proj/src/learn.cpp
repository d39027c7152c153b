#include "flexsign/learn.hpp"

#include <algorithm>

#include "flexsign/errors.hpp"

namespace flexsign {

TrainMatrix to_matrix(const Dataset& d) {
  d.validate();
  TrainMatrix m;
  m.classes = d.vocabulary.size();
  for (const auto& s : d.samples) {
    if (s.quality == Quality::quarantined) continue;
    const std::vector<double> flat = flatten_window(s.window);
    if (m.dim == 0) m.dim = static_cast<int>(flat.size());
    m.x.insert(m.x.end(), flat.begin(), flat.end());
    m.y.push_back(s.label);
  }
  if (m.y.empty()) throw DataError("no trainable samples (all quarantined or empty dataset)");
  return m;
}

const char* classifier_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::random_forest: return "rf";
    case ClassifierKind::svm_rbf: return "svm";
    case ClassifierKind::knn5: return "knn5";
    case ClassifierKind::knn3: return "knn3";
    case ClassifierKind::logistic_regression: return "logreg";
    case ClassifierKind::decision_tree: return "dt";
  }
  return "unknown";
}

ClassifierKind classifier_from_name(const std::string& name) {
  for (ClassifierKind kind : all_classifiers()) {
    if (name == classifier_name(kind)) return kind;
  }
  throw DataError("unknown classifier '" + name + "' (expected rf, svm, knn5, knn3, logreg or dt)");
}

std::vector<ClassifierKind> all_classifiers() {
  return {ClassifierKind::random_forest,       ClassifierKind::svm_rbf,
          ClassifierKind::knn5,                ClassifierKind::knn3,
          ClassifierKind::logistic_regression, ClassifierKind::decision_tree};
}

void TrainOptions::validate() const {
  if (rf_trees < 1) throw DataError("forest needs at least one tree");
  if (rf_max_depth < 0) throw DataError("forest depth must be >= 0 (0 = unlimited)");
  if (rf_features_per_node < 0) throw DataError("features per node must be >= 0 (0 = sqrt rule)");
  if (dt_max_depth < 0) throw DataError("tree depth must be >= 0 (0 = unlimited)");
  if (!(lr_lambda >= 0.0)) throw DataError("ridge penalty must be >= 0");
  if (lr_max_epochs < 0) throw DataError("epoch cap must be >= 0");
  if (!(lr_tol > 0.0)) throw DataError("loss tolerance must be > 0");
  if (!(svm_c > 0.0)) throw DataError("margin cost must be > 0");
  if (svm_gamma < 0.0) throw DataError("kernel width must be >= 0 (0 = automatic)");
  if (!(svm_tol > 0.0)) throw DataError("violation tolerance must be > 0");
  if (svm_iter_factor < 1) throw DataError("iteration factor must be >= 1");
}

int Model::predict(const std::vector<double>& features) const {
  if (static_cast<int>(features.size()) != dim_) {
    throw ModelError("feature dimension " + std::to_string(features.size()) +
                     " does not match model dimension " + std::to_string(dim_));
  }
  return predict_impl(features.data());
}

std::vector<int> Model::predict_rows(const TrainMatrix& m) const {
  if (m.dim != dim_) {
    throw ModelError("feature dimension " + std::to_string(m.dim) +
                     " does not match model dimension " + std::to_string(dim_));
  }
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = predict_impl(m.row(i));
  return out;
}

int argmax_lowest(const std::vector<int>& counts) {
  int best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int argmax_lowest(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

std::unique_ptr<Model> fit(ClassifierKind kind, const Dataset& train, const TrainOptions& opt) {
  opt.validate();
  const TrainMatrix m = to_matrix(train);
  switch (kind) {
    case ClassifierKind::random_forest:
      return std::make_unique<RandomForestModel>(m, train.vocabulary, opt);
    case ClassifierKind::svm_rbf:
      return std::make_unique<SvmModel>(m, train.vocabulary, opt);
    case ClassifierKind::knn5:
      return std::make_unique<KnnModel>(m, train.vocabulary, 5);
    case ClassifierKind::knn3:
      return std::make_unique<KnnModel>(m, train.vocabulary, 3);
    case ClassifierKind::logistic_regression:
      return std::make_unique<LogRegModel>(m, train.vocabulary, opt);
    case ClassifierKind::decision_tree:
      return std::make_unique<DecisionTreeModel>(m, train.vocabulary, opt.dt_max_depth, 0, nullptr);
  }
  throw ModelError("unhandled classifier kind");
}

}  // namespace flexsign
