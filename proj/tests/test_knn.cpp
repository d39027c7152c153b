#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

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

}  // namespace

TEST_CASE("one neighbor reproduces the training labels on distinct points") {
  Rng rng(31);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 80; ++i) {
    rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
    labels.push_back(static_cast<int>(rng.next_below(5)));
  }
  const TrainMatrix m = matrix_of(rows, labels, 5);
  const KnnModel knn(m, toy_vocab(5), 1);
  CHECK(knn.predict_rows(m) == labels);
}

TEST_CASE("a hand-checked five-neighbor vote") {
  // Query at the origin. Distances: class-0 points at 1, 2, 5; class-1 points
  // at 3, 4, 6. Five nearest = {1, 2, 3, 4, 5} -> three class-0 votes win.
  const TrainMatrix m = matrix_of(
      {{1.0, 0.0}, {0.0, 2.0}, {0.0, 5.0}, {3.0, 0.0}, {0.0, 4.0}, {6.0, 0.0}},
      {0, 0, 0, 1, 1, 1}, 2);
  const KnnModel knn(m, toy_vocab(2), 5);
  CHECK(knn.predict({0.0, 0.0}) == 0);

  // Same geometry, three neighbors = {1, 2, 3}: two class-0, one class-1.
  const KnnModel knn3(m, toy_vocab(2), 3);
  CHECK(knn3.predict({0.0, 0.0}) == 0);
}

TEST_CASE("a tied vote goes to the class of the nearest tied neighbor") {
  // Two neighbors, one of each class: the closer one (class 1) decides.
  const TrainMatrix m = matrix_of({{1.0}, {2.0}}, {1, 0}, 2);
  const KnnModel knn(m, toy_vocab(2), 2);
  CHECK(knn.predict({0.0}) == 1);

  // Four neighbors, 2-2 tie between classes 0 and 1; nearest is class 1.
  const TrainMatrix m2 = matrix_of({{1.0}, {2.0}, {3.0}, {4.0}}, {1, 0, 1, 0}, 2);
  const KnnModel knn4(m2, toy_vocab(2), 4);
  CHECK(knn4.predict({0.0}) == 1);
}

TEST_CASE("equal distances rank by training order") {
  // Both points sit at distance 1 from the query; the earlier row wins the
  // 1-neighbor vote.
  const TrainMatrix m = matrix_of({{1.0}, {-1.0}}, {1, 0}, 2);
  const KnnModel knn(m, toy_vocab(2), 1);
  CHECK(knn.predict({0.0}) == 1);

  const TrainMatrix swapped = matrix_of({{-1.0}, {1.0}}, {0, 1}, 2);
  const KnnModel knn2(swapped, toy_vocab(2), 1);
  CHECK(knn2.predict({0.0}) == 0);
}

TEST_CASE("k larger than the training set degrades to a global majority") {
  const TrainMatrix m = matrix_of({{1.0}, {2.0}, {3.0}}, {1, 1, 0}, 2);
  const KnnModel knn(m, toy_vocab(2), 10);
  CHECK(knn.predict({100.0}) == 1);
}

TEST_CASE("the kind follows the neighbor count") {
  const TrainMatrix m = matrix_of({{1.0}, {2.0}}, {0, 1}, 2);
  CHECK(KnnModel(m, toy_vocab(2), 5).kind() == ClassifierKind::knn5);
  CHECK(KnnModel(m, toy_vocab(2), 3).kind() == ClassifierKind::knn3);
}

TEST_CASE("prediction validates the dimension and construction the inputs") {
  const TrainMatrix m = matrix_of({{1.0, 2.0}, {3.0, 4.0}}, {0, 1}, 2);
  const KnnModel knn(m, toy_vocab(2), 1);
  CHECK_THROWS_AS(knn.predict({1.0}), ModelError);
  CHECK_THROWS_AS(KnnModel(m, toy_vocab(2), 0), DataError);
  TrainMatrix empty;
  empty.dim = 2;
  empty.classes = 2;
  CHECK_THROWS_AS(KnnModel(empty, toy_vocab(2), 1), DataError);
}
