#include <algorithm>
#include <cmath>
#include <ostream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

namespace {

// scores[k] = w_k . x + bias_k for one sample
void class_scores(const std::vector<double>& weights, int classes, int dim, const double* x,
                  std::vector<double>& scores) {
  const std::size_t stride = static_cast<std::size_t>(dim) + 1;
  for (int k = 0; k < classes; ++k) {
    const double* w = weights.data() + static_cast<std::size_t>(k) * stride;
    double s = w[dim];  // bias sits in the last column
    for (int f = 0; f < dim; ++f) s += w[f] * x[f];
    scores[static_cast<std::size_t>(k)] = s;
  }
}

double log_sum_exp(const std::vector<double>& scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

}  // namespace

double logreg_loss(const std::vector<double>& weights, const TrainMatrix& m, double lambda) {
  const int classes = m.classes;
  const std::size_t stride = static_cast<std::size_t>(m.dim) + 1;
  std::vector<double> scores(static_cast<std::size_t>(classes));
  double data_loss = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    class_scores(weights, classes, m.dim, m.row(i), scores);
    data_loss += log_sum_exp(scores) - scores[static_cast<std::size_t>(m.y[i])];
  }
  const double n = static_cast<double>(m.rows());
  double penalty = 0.0;
  for (int k = 0; k < classes; ++k) {
    const double* w = weights.data() + static_cast<std::size_t>(k) * stride;
    for (int f = 0; f < m.dim; ++f) penalty += w[f] * w[f];  // bias is not penalized
  }
  return data_loss / n + lambda / (2.0 * n) * penalty;
}

std::vector<double> logreg_grad(const std::vector<double>& weights, const TrainMatrix& m,
                                double lambda) {
  const int classes = m.classes;
  const std::size_t stride = static_cast<std::size_t>(m.dim) + 1;
  std::vector<double> grad(weights.size(), 0.0);
  std::vector<double> scores(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* x = m.row(i);
    class_scores(weights, classes, m.dim, x, scores);
    const double lse = log_sum_exp(scores);
    for (int k = 0; k < classes; ++k) {
      const double p = std::exp(scores[static_cast<std::size_t>(k)] - lse);
      const double resid = p - (k == m.y[i] ? 1.0 : 0.0);
      double* g = grad.data() + static_cast<std::size_t>(k) * stride;
      for (int f = 0; f < m.dim; ++f) g[f] += resid * x[f];
      g[m.dim] += resid;
    }
  }
  const double n = static_cast<double>(m.rows());
  for (double& g : grad) g /= n;
  for (int k = 0; k < classes; ++k) {
    const double* w = weights.data() + static_cast<std::size_t>(k) * stride;
    double* g = grad.data() + static_cast<std::size_t>(k) * stride;
    for (int f = 0; f < m.dim; ++f) g[f] += lambda / n * w[f];
  }
  return grad;
}

LogRegModel::LogRegModel(const Vocabulary& vocab) { vocab_ = vocab; }

void LogRegModel::set_shape(int dim, int classes) {
  dim_ = dim;
  classes_ = classes;
  weights_.assign(static_cast<std::size_t>(classes) * (static_cast<std::size_t>(dim) + 1), 0.0);
}

LogRegModel::LogRegModel(const TrainMatrix& m, const Vocabulary& vocab, const TrainOptions& opt,
                         LogRegTrace* trace) {
  opt.validate();
  if (m.rows() == 0) throw DataError("cannot fit a linear model to an empty matrix");
  vocab_ = vocab;
  dim_ = m.dim;
  classes_ = m.classes;
  weights_.assign(static_cast<std::size_t>(classes_) * (static_cast<std::size_t>(dim_) + 1), 0.0);

  // Full-batch gradient descent from zero weights with a backtracking step:
  // halve until the loss actually drops, grow gently after each success.
  double loss = logreg_loss(weights_, m, opt.lr_lambda);
  if (trace) {
    trace->losses.clear();
    trace->losses.push_back(loss);
  }
  double eta = 1.0;
  bool reached_tol = false;
  int epoch = 0;
  std::vector<double> candidate(weights_.size());
  for (; epoch < opt.lr_max_epochs; ++epoch) {
    const std::vector<double> grad = logreg_grad(weights_, m, opt.lr_lambda);
    double new_loss = loss;
    bool accepted = false;
    for (int halvings = 0; halvings <= 30; ++halvings) {
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        candidate[i] = weights_[i] - eta * grad[i];
      }
      new_loss = logreg_loss(candidate, m, opt.lr_lambda);
      if (new_loss < loss) {
        accepted = true;
        break;
      }
      eta /= 2.0;
    }
    if (!accepted) {
      // No step length makes progress: the optimum is resolved to float noise.
      reached_tol = true;
      break;
    }
    weights_.swap(candidate);
    const double improvement = loss - new_loss;
    loss = new_loss;
    if (trace) trace->losses.push_back(loss);
    eta *= 1.1;
    if (improvement < opt.lr_tol) {
      reached_tol = true;
      ++epoch;
      break;
    }
  }
  converged_ = reached_tol || opt.lr_max_epochs == 0;
  if (trace) {
    trace->epochs = epoch;
    trace->converged = converged_;
  }
}

int LogRegModel::predict_impl(const double* features) const {
  std::vector<double> scores(static_cast<std::size_t>(classes_));
  class_scores(weights_, classes_, dim_, features, scores);
  return argmax_lowest(scores);
}

std::vector<double> LogRegModel::predict_proba(const std::vector<double>& features) const {
  if (static_cast<int>(features.size()) != dim_) {
    throw ModelError("feature dimension does not match model dimension");
  }
  std::vector<double> scores(static_cast<std::size_t>(classes_));
  class_scores(weights_, classes_, dim_, features.data(), scores);
  const double lse = log_sum_exp(scores);
  for (double& s : scores) s = std::exp(s - lse);
  return scores;
}

void LogRegModel::save_payload(std::ostream& out) const {
  out << "classes " << classes_ << " cols " << dim_ + 1 << "\n";
  out << "converged " << (converged_ ? 1 : 0) << "\n";
  const std::size_t stride = static_cast<std::size_t>(dim_) + 1;
  for (int k = 0; k < classes_; ++k) {
    const double* w = weights_.data() + static_cast<std::size_t>(k) * stride;
    for (std::size_t f = 0; f < stride; ++f) {
      out << (f == 0 ? "" : " ") << format_real(w[f]);
    }
    out << "\n";
  }
}

}  // namespace flexsign
