#include <algorithm>
#include <cmath>
#include <ostream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

double rbf_kernel(const double* a, const double* b, int dim, double gamma) {
  double d2 = 0.0;
  for (int f = 0; f < dim; ++f) {
    const double diff = a[f] - b[f];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

double auto_gamma(const TrainMatrix& m) {
  if (m.x.empty() || m.dim == 0) throw DataError("cannot derive a kernel width from no data");
  double mean = 0.0;
  for (double v : m.x) mean += v;
  mean /= static_cast<double>(m.x.size());
  double var = 0.0;
  for (double v : m.x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m.x.size());
  if (var <= 0.0) return 1.0;  // constant features: any width behaves the same
  return 1.0 / (static_cast<double>(m.dim) * var);
}

SmoResult smo_solve(const std::vector<double>& kernel, const std::vector<int>& y, double c,
                    double tol, int max_iter) {
  const std::size_t n = y.size();
  if (kernel.size() != n * n) throw ModelError("kernel matrix does not match label count");
  auto k_at = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };

  SmoResult r;
  r.alpha.assign(n, 0.0);
  // grad[i] = y_i * (sum_j alpha_j y_j K_ij) - 1, the dual gradient
  std::vector<double> grad(n, -1.0);

  auto in_up = [&](std::size_t i) {
    return (y[i] > 0 && r.alpha[i] < c) || (y[i] < 0 && r.alpha[i] > 0.0);
  };
  auto in_low = [&](std::size_t i) {
    return (y[i] > 0 && r.alpha[i] > 0.0) || (y[i] < 0 && r.alpha[i] < c);
  };

  auto objective = [&]() {
    // dual value sum(alpha) - 1/2 aQa, using aQa = sum_i alpha_i (grad_i + 1)
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      quad += r.alpha[i] * (grad[i] + 1.0);
      lin += r.alpha[i];
    }
    return lin - 0.5 * quad;
  };

  r.objective.push_back(objective());
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    // most violating pair: largest ascent direction against smallest
    std::size_t i = n;
    std::size_t j = n;
    double up_best = -1e300;
    double low_best = 1e300;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = -y[k] * grad[k];
      if (in_up(k) && v > up_best) {
        up_best = v;
        i = k;
      }
      if (in_low(k) && v < low_best) {
        low_best = v;
        j = k;
      }
    }
    if (i == n || j == n || up_best - low_best < tol) {
      r.tol_met = true;
      break;
    }

    const double yi = y[i];
    const double yj = y[j];
    // errors against the (bias-free) decision value; the bias cancels in E_i - E_j
    const double e_i = yi * grad[i];  // = f0(x_i) - y_i
    const double e_j = yj * grad[j];
    double eta = k_at(i, i) + k_at(j, j) - 2.0 * k_at(i, j);
    if (eta < 1e-12) eta = 1e-12;

    double lo;
    double hi;
    const double ai_old = r.alpha[i];
    const double aj_old = r.alpha[j];
    if (yi != yj) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c, c + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c);
      hi = std::min(c, ai_old + aj_old);
    }

    double aj_new = aj_old + yj * (e_i - e_j) / eta;
    aj_new = std::clamp(aj_new, lo, hi);
    // the companion update can drift an ulp outside the box; snap it back
    const double ai_new = std::clamp(ai_old + yi * yj * (aj_old - aj_new), 0.0, c);
    if (aj_new == aj_old) {
      // boxed in: no progress possible on this pair
      r.tol_met = true;
      break;
    }
    r.alpha[i] = ai_new;
    r.alpha[j] = aj_new;

    const double di = (ai_new - ai_old) * yi;
    const double dj = (aj_new - aj_old) * yj;
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += y[k] * (di * k_at(i, k) + dj * k_at(j, k));
    }
    r.objective.push_back(objective());
  }

  // bias: average over free support vectors; when none are free, center it
  // between the bound-constrained violation limits
  double b_sum = 0.0;
  int b_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (r.alpha[k] > 0.0 && r.alpha[k] < c) {
      // at optimality y_k - f0(x_k) = b for free vectors; y_k*grad_k = f0 - y_k
      b_sum += -y[k] * grad[k];
      b_count += 1;
    }
  }
  if (b_count > 0) {
    r.bias = b_sum / b_count;
  } else {
    double up_best = -1e300;
    double low_best = 1e300;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = -y[k] * grad[k];
      if (in_up(k)) up_best = std::max(up_best, v);
      if (in_low(k)) low_best = std::min(low_best, v);
    }
    if (up_best > -1e300 && low_best < 1e300) {
      r.bias = (up_best + low_best) / 2.0;
    } else {
      r.bias = 0.0;
    }
  }
  return r;
}

SvmModel::SvmModel(const Vocabulary& vocab) { vocab_ = vocab; }

SvmModel::SvmModel(const TrainMatrix& m, const Vocabulary& vocab, const TrainOptions& opt) {
  opt.validate();
  if (m.rows() == 0) throw DataError("cannot fit a margin model to an empty matrix");
  vocab_ = vocab;
  dim_ = m.dim;
  gamma_ = opt.svm_gamma > 0.0 ? opt.svm_gamma : auto_gamma(m);

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(m.classes));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    by_class[static_cast<std::size_t>(m.y[i])].push_back(i);
  }

  for (int a = 0; a < m.classes; ++a) {
    for (int b = a + 1; b < m.classes; ++b) {
      const auto& rows_a = by_class[static_cast<std::size_t>(a)];
      const auto& rows_b = by_class[static_cast<std::size_t>(b)];
      if (rows_a.empty() || rows_b.empty()) continue;  // pair absent from training data

      std::vector<std::size_t> rows;
      rows.reserve(rows_a.size() + rows_b.size());
      rows.insert(rows.end(), rows_a.begin(), rows_a.end());
      rows.insert(rows.end(), rows_b.begin(), rows_b.end());
      std::vector<int> y(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        y[k] = m.y[rows[k]] == a ? 1 : -1;  // positive decision votes for the lower label
      }

      const std::size_t n = rows.size();
      std::vector<double> kernel(n * n);
      for (std::size_t p = 0; p < n; ++p) {
        kernel[p * n + p] = 1.0;
        for (std::size_t q = p + 1; q < n; ++q) {
          const double k_pq = rbf_kernel(m.row(rows[p]), m.row(rows[q]), m.dim, gamma_);
          kernel[p * n + q] = k_pq;
          kernel[q * n + p] = k_pq;
        }
      }

      const SmoResult sol = smo_solve(kernel, y, opt.svm_c, opt.svm_tol,
                                      static_cast<int>(n) * opt.svm_iter_factor);
      if (!sol.tol_met) converged_ = false;

      Machine machine;
      machine.label_a = a;
      machine.label_b = b;
      machine.bias = sol.bias;
      for (std::size_t k = 0; k < n; ++k) {
        if (sol.alpha[k] == 0.0) continue;  // only support vectors are kept
        machine.coef.push_back(sol.alpha[k] * y[k]);
        machine.support.emplace_back(m.row(rows[k]), m.row(rows[k]) + m.dim);
      }
      machines_.push_back(std::move(machine));
    }
  }
}

int SvmModel::predict_impl(const double* features) const {
  std::vector<int> votes(static_cast<std::size_t>(vocab_.size()), 0);
  for (const Machine& machine : machines_) {
    double f = machine.bias;
    for (std::size_t k = 0; k < machine.coef.size(); ++k) {
      f += machine.coef[k] * rbf_kernel(machine.support[k].data(), features, dim_, gamma_);
    }
    votes[static_cast<std::size_t>(f > 0.0 ? machine.label_a : machine.label_b)] += 1;
  }
  return argmax_lowest(votes);
}

void SvmModel::save_payload(std::ostream& out) const {
  out << "gamma " << format_real(gamma_) << "\n";
  out << "converged " << (converged_ ? 1 : 0) << "\n";
  out << "machines " << machines_.size() << "\n";
  for (const Machine& machine : machines_) {
    out << "pair " << machine.label_a << " " << machine.label_b << " svs " << machine.coef.size()
        << " bias " << format_real(machine.bias) << "\n";
    for (std::size_t k = 0; k < machine.coef.size(); ++k) {
      out << format_real(machine.coef[k]);
      for (int f = 0; f < dim_; ++f) out << " " << format_real(machine.support[k][f]);
      out << "\n";
    }
  }
}

}  // namespace flexsign
