#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "flexsign/core.hpp"
#include "flexsign/rng.hpp"

namespace flexsign {

// Row-major feature matrix for training: one flattened gesture window per row.
struct TrainMatrix {
  int dim = 0;
  int classes = 0;
  std::vector<double> x;  // rows() * dim values
  std::vector<int> y;     // one label per row

  std::size_t rows() const { return y.size(); }
  const double* row(std::size_t i) const { return x.data() + i * static_cast<std::size_t>(dim); }
};

// Flattens a dataset for training. Quarantined samples never reach a model.
TrainMatrix to_matrix(const Dataset& d);

enum class ClassifierKind {
  random_forest,
  svm_rbf,
  knn5,
  knn3,
  logistic_regression,
  decision_tree,
};

// Stable short names used on the command line and in model files:
// rf, svm, knn5, knn3, logreg, dt.
const char* classifier_name(ClassifierKind kind);
ClassifierKind classifier_from_name(const std::string& name);
std::vector<ClassifierKind> all_classifiers();

struct TrainOptions {
  std::uint64_t seed = 42;

  int rf_trees = 100;
  int rf_max_depth = 10;
  bool rf_bootstrap = true;
  int rf_features_per_node = 0;  // 0: floor(sqrt(dim))

  int dt_max_depth = 0;  // 0: unlimited

  double lr_lambda = 1.0;
  int lr_max_epochs = 1000;
  double lr_tol = 1e-8;

  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0: 1 / (dim * pooled feature variance)
  double svm_tol = 1e-3;
  int svm_iter_factor = 10;  // iteration cap = factor * pair size

  void validate() const;
};

// A trained classifier. Prediction validates the feature dimension and always
// returns a label inside the training vocabulary.
class Model {
 public:
  virtual ~Model() = default;

  virtual ClassifierKind kind() const = 0;
  int dim() const { return dim_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  // False when an iterative trainer hit its cap before reaching tolerance.
  bool converged() const { return converged_; }

  int predict(const std::vector<double>& features) const;
  std::vector<int> predict_rows(const TrainMatrix& m) const;

  // Kind-specific payload, written under the common model-file header.
  virtual void save_payload(std::ostream& out) const = 0;

 protected:
  virtual int predict_impl(const double* features) const = 0;

  Vocabulary vocab_;
  int dim_ = 0;
  bool converged_ = true;
};

std::unique_ptr<Model> fit(ClassifierKind kind, const Dataset& train, const TrainOptions& opt);

// Versioned plain-text model files; reals keep full precision, so a loaded
// model predicts exactly like the one that was saved.
void save_model(const Model& m, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);
std::unique_ptr<Model> load_model_stream(std::istream& in, const std::string& name);

// Index of the largest count; ties go to the lowest index. Shared by every
// vote-based predictor so tie behavior is identical across them.
int argmax_lowest(const std::vector<int>& counts);
int argmax_lowest(const std::vector<double>& scores);

// --- decision tree ---------------------------------------------------------

// 1 - sum(p_k^2) over the labels behind `indices`.
double gini_impurity(const std::vector<int>& labels, const std::vector<std::size_t>& indices,
                     int classes);

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity of the best split
};

// Midpoint between two adjacent sorted values; falls back to the lower value
// when the midpoint rounds onto the upper one, so `x <= threshold` always
// sends the lower value left.
double midpoint_threshold(double lower, double upper);

// Exhaustive best split over the given features, scored by weighted Gini.
// Ties resolve to the lowest feature, then the lowest threshold.
SplitChoice best_split(const TrainMatrix& m, const std::vector<std::size_t>& indices,
                       const std::vector<int>& features);

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;
};

class DecisionTreeModel : public Model {
 public:
  // features_per_node 0 trains on every feature (no randomness); a positive
  // value samples that many features per node from `rng`.
  DecisionTreeModel(const TrainMatrix& m, const Vocabulary& vocab, int max_depth,
                    int features_per_node, Rng* rng);
  explicit DecisionTreeModel(const Vocabulary& vocab);  // for loading

  ClassifierKind kind() const override { return ClassifierKind::decision_tree; }
  void save_payload(std::ostream& out) const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }
  void set_dim(int dim) { dim_ = dim; }
  // Unchecked predict for callers that already validated the dimension.
  int predict_raw(const double* features) const { return predict_impl(features); }

 protected:
  int predict_impl(const double* features) const override;

 private:
  int grow(const TrainMatrix& m, std::vector<std::size_t>& indices, int depth, int max_depth,
           int features_per_node, Rng* rng);

  std::vector<TreeNode> nodes_;
};

// --- random forest ---------------------------------------------------------

class RandomForestModel : public Model {
 public:
  RandomForestModel(const TrainMatrix& m, const Vocabulary& vocab, const TrainOptions& opt);
  explicit RandomForestModel(const Vocabulary& vocab);

  ClassifierKind kind() const override { return ClassifierKind::random_forest; }
  void save_payload(std::ostream& out) const override;

  const std::vector<DecisionTreeModel>& trees() const { return trees_; }
  std::vector<DecisionTreeModel>& mutable_trees() { return trees_; }
  void set_dim(int dim) { dim_ = dim; }

 protected:
  int predict_impl(const double* features) const override;

 private:
  std::vector<DecisionTreeModel> trees_;
};

// --- k-nearest neighbors ---------------------------------------------------

class KnnModel : public Model {
 public:
  KnnModel(const TrainMatrix& m, const Vocabulary& vocab, int k);
  KnnModel(const Vocabulary& vocab, int k);

  ClassifierKind kind() const override;
  void save_payload(std::ostream& out) const override;

  int k() const { return k_; }
  TrainMatrix& mutable_train() { return train_; }
  void set_dim(int dim) { dim_ = dim; }

 protected:
  int predict_impl(const double* features) const override;

 private:
  int k_ = 5;
  TrainMatrix train_;
};

// --- logistic regression ---------------------------------------------------

// Multinomial cross-entropy with an L2 penalty (lambda/2n * ||W||^2, bias
// excluded). Weights are classes x (dim + 1), bias in the last column.
double logreg_loss(const std::vector<double>& weights, const TrainMatrix& m, double lambda);
std::vector<double> logreg_grad(const std::vector<double>& weights, const TrainMatrix& m,
                                double lambda);

struct LogRegTrace {
  std::vector<double> losses;  // accepted loss after each epoch, index 0 = initial
  int epochs = 0;
  bool converged = false;
};

class LogRegModel : public Model {
 public:
  LogRegModel(const TrainMatrix& m, const Vocabulary& vocab, const TrainOptions& opt,
              LogRegTrace* trace = nullptr);
  explicit LogRegModel(const Vocabulary& vocab);

  ClassifierKind kind() const override { return ClassifierKind::logistic_regression; }
  void save_payload(std::ostream& out) const override;

  // Softmax class probabilities; each row sums to 1.
  std::vector<double> predict_proba(const std::vector<double>& features) const;

  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  void set_shape(int dim, int classes);
  void set_converged(bool c) { converged_ = c; }

 protected:
  int predict_impl(const double* features) const override;

 private:
  int classes_ = 0;
  std::vector<double> weights_;  // classes_ x (dim_ + 1)
};

// --- support vector machine (RBF, one-vs-one) ------------------------------

double rbf_kernel(const double* a, const double* b, int dim, double gamma);
// 1 / (dim * population variance of all matrix entries).
double auto_gamma(const TrainMatrix& m);

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
  int iterations = 0;
  bool tol_met = false;
  std::vector<double> objective;  // dual objective after each step, non-decreasing
};

// Sequential minimal optimization of the binary soft-margin dual over a
// precomputed kernel matrix (row-major n x n) and labels in {-1, +1}.
SmoResult smo_solve(const std::vector<double>& kernel, const std::vector<int>& y, double c,
                    double tol, int max_iter);

class SvmModel : public Model {
 public:
  SvmModel(const TrainMatrix& m, const Vocabulary& vocab, const TrainOptions& opt);
  explicit SvmModel(const Vocabulary& vocab);

  ClassifierKind kind() const override { return ClassifierKind::svm_rbf; }
  void save_payload(std::ostream& out) const override;

  double gamma() const { return gamma_; }

  struct Machine {
    int label_a = 0;
    int label_b = 0;
    double bias = 0.0;
    std::vector<double> coef;                 // alpha * y per support vector
    std::vector<std::vector<double>> support;  // support vector features
  };

  const std::vector<Machine>& machines() const { return machines_; }
  std::vector<Machine>& mutable_machines() { return machines_; }
  void set_gamma(double g) { gamma_ = g; }
  void set_dim(int dim) { dim_ = dim; }
  void set_converged(bool c) { converged_ = c; }

 protected:
  int predict_impl(const double* features) const override;

 private:
  double gamma_ = 0.0;
  std::vector<Machine> machines_;
};

}  // namespace flexsign
