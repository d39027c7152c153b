#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"
#include "flexsign/rng.hpp"

using namespace flexsign;

namespace {

TrainMatrix matrix_of(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                      int classes) {
  TrainMatrix m;
  m.dim = static_cast<int>(rows.front().size());
  m.classes = classes;
  for (const auto& r : rows) m.x.insert(m.x.end(), r.begin(), r.end());
  m.y = labels;
  return m;
}

Vocabulary toy_vocab(int classes) {
  std::vector<std::string> names;
  for (int i = 0; i < classes; ++i) names.push_back("class" + std::to_string(i));
  return Vocabulary(names);
}

TrainMatrix random_matrix(int n, int d, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    for (int f = 0; f < d; ++f) row.push_back(rng.next_double());
    rows.push_back(row);
    labels.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(classes))));
  }
  return matrix_of(rows, labels, classes);
}

// Central finite differences of the loss, the independent check on the
// analytic gradient.
std::vector<double> fd_grad(const std::vector<double>& w, const TrainMatrix& m, double lambda,
                            double h) {
  std::vector<double> g(w.size());
  std::vector<double> probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + h;
    const double up = logreg_loss(probe, m, lambda);
    probe[i] = w[i] - h;
    const double down = logreg_loss(probe, m, lambda);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("the analytic gradient matches central finite differences") {
  Rng rng(555);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 12 + static_cast<int>(rng.next_below(10));
    const int d = 3 + static_cast<int>(rng.next_below(4));
    const int classes = 2 + static_cast<int>(rng.next_below(3));
    const double lambda = trial % 2 == 0 ? 1.0 : 0.0;
    const TrainMatrix m = random_matrix(n, d, classes, 1000 + trial);

    std::vector<double> w(static_cast<std::size_t>(classes) * (static_cast<std::size_t>(d) + 1));
    for (double& x : w) x = rng.next_gaussian() * 0.5;

    const std::vector<double> analytic = logreg_grad(w, m, lambda);
    const std::vector<double> numeric = fd_grad(w, m, lambda, 1e-6);
    const double scale = std::max(max_abs(analytic), 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    INFO("trial " << trial << " n=" << n << " d=" << d << " classes=" << classes);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("zero weights on a 23-class problem cost exactly ln 23") {
  const TrainMatrix m = random_matrix(50, 4, 23, 77);
  const std::vector<double> w(static_cast<std::size_t>(23) * 5, 0.0);
  const double loss = logreg_loss(w, m, 1.0);  // zero weights carry no penalty
  CHECK(loss == doctest::Approx(3.1354942159291497).epsilon(1e-14));
  CHECK(loss == doctest::Approx(std::log(23.0)).epsilon(1e-14));
}

TEST_CASE("training strictly decreases the loss and records the trace") {
  const TrainMatrix m = random_matrix(60, 5, 3, 888);
  TrainOptions opt;
  opt.lr_lambda = 1.0;
  LogRegTrace trace;
  const LogRegModel model(m, toy_vocab(3), opt, &trace);
  REQUIRE(trace.losses.size() >= 2);
  CHECK(trace.losses.front() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  for (std::size_t i = 1; i < trace.losses.size(); ++i) {
    CHECK(trace.losses[i] < trace.losses[i - 1]);
  }
  CHECK(trace.losses.back() ==
        doctest::Approx(logreg_loss(model.weights(), m, opt.lr_lambda)).epsilon(1e-12));
}

TEST_CASE("a separable two-class problem is learned to completion") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Rng rng(2024);
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    const double center = label == 0 ? 0.2 : 0.8;
    rows.push_back({center + 0.05 * rng.next_gaussian(), center + 0.05 * rng.next_gaussian()});
    labels.push_back(label);
  }
  const TrainMatrix m = matrix_of(rows, labels, 2);
  TrainOptions opt;
  opt.lr_lambda = 0.01;
  LogRegTrace trace;
  const LogRegModel model(m, toy_vocab(2), opt, &trace);
  CHECK(model.converged());
  CHECK(model.predict_rows(m) == labels);
}

TEST_CASE("an untrained model scores every class equally and answers label 0") {
  const TrainMatrix m = random_matrix(10, 4, 5, 99);
  TrainOptions opt;
  opt.lr_max_epochs = 0;
  const LogRegModel model(m, toy_vocab(5), opt);
  CHECK(model.converged());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CHECK(model.predict(std::vector<double>(m.row(i), m.row(i) + m.dim)) == 0);
  }
}

TEST_CASE("predicted probabilities sum to one") {
  const TrainMatrix m = random_matrix(30, 4, 4, 123);
  TrainOptions opt;
  opt.lr_max_epochs = 50;
  const LogRegModel model(m, toy_vocab(4), opt);
  Rng rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.next_double() * 2.0 - 0.5;
    const std::vector<double> p = model.predict_proba(x);
    REQUIRE(p.size() == 4);
    double sum = 0.0;
    for (double q : p) {
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      sum += q;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // argmax of probabilities agrees with the predicted label
    CHECK(argmax_lowest(p) == model.predict(x));
  }
}

TEST_CASE("the ridge penalty shrinks the weights") {
  const TrainMatrix m = random_matrix(50, 4, 3, 321);
  TrainOptions opt;
  opt.lr_lambda = 0.0;
  opt.lr_max_epochs = 300;
  const LogRegModel loose(m, toy_vocab(3), opt);
  opt.lr_lambda = 10.0;
  const LogRegModel tight(m, toy_vocab(3), opt);
  auto norm_no_bias = [&](const std::vector<double>& w) {
    double s = 0.0;
    const std::size_t stride = 5;
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t f = 0; f + 1 < stride; ++f) {
        const double v = w[k * stride + f];
        s += v * v;
      }
    }
    return s;
  };
  CHECK(norm_no_bias(tight.weights()) < norm_no_bias(loose.weights()));
}

TEST_CASE("the epoch cap marks the model as not converged") {
  const TrainMatrix m = random_matrix(60, 5, 4, 456);
  TrainOptions opt;
  opt.lr_max_epochs = 3;  // far too few for the tolerance
  opt.lr_tol = 1e-14;
  LogRegTrace trace;
  const LogRegModel model(m, toy_vocab(4), opt, &trace);
  CHECK_FALSE(model.converged());
  CHECK_FALSE(trace.converged);
  CHECK(trace.epochs == 3);
}
