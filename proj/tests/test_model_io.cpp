#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flexsign/core.hpp"
#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"
#include "flexsign/synth.hpp"

using namespace flexsign;

namespace {

std::string tmp_path(const char* name) {
  return std::string("/tmp/flexsign_model_") + name + "_" + std::to_string(getpid());
}

struct Fixture {
  Dataset train;
  Dataset probe;

  Fixture() {
    const auto [vocab, templates] = make_default_vocabulary();
    std::vector<std::string> names;
    std::vector<SignTemplate> subset;
    for (int k = 0; k < 5; ++k) {
      names.push_back(vocab.notation(k));
      subset.push_back(templates[static_cast<std::size_t>(k)]);
    }
    const Vocabulary small(names);
    GenConfig cfg;
    cfg.seed = 60;
    cfg.samples_per_class = 6;
    train = synthesize_dataset(small, subset, cfg);
    cfg.seed = 61;
    probe = synthesize_dataset(small, subset, cfg);
  }
};

}  // namespace

TEST_CASE("every classifier kind survives a save/load round trip") {
  const Fixture fx;
  TrainOptions opt;
  opt.rf_trees = 10;  // keep the forest small for test speed
  const TrainMatrix probe = to_matrix(fx.probe);

  for (ClassifierKind kind : all_classifiers()) {
    INFO("classifier " << classifier_name(kind));
    const std::unique_ptr<Model> trained = fit(kind, fx.train, opt);
    const std::string path = tmp_path(classifier_name(kind));
    save_model(*trained, path);

    const std::unique_ptr<Model> loaded = load_model(path);
    CHECK(loaded->kind() == kind);
    CHECK(loaded->dim() == trained->dim());
    CHECK(loaded->vocabulary() == trained->vocabulary());
    CHECK(loaded->converged() == trained->converged());
    CHECK(loaded->predict_rows(probe) == trained->predict_rows(probe));

    // saving the loaded model reproduces the file byte for byte
    const std::string path2 = path + ".resaved";
    save_model(*loaded, path2);
    CHECK(read_file(path2) == read_file(path));
    std::remove(path.c_str());
    std::remove(path2.c_str());
  }
}

TEST_CASE("the model header carries kind, vocabulary and dimension") {
  const Fixture fx;
  TrainOptions opt;
  const std::unique_ptr<Model> model = fit(ClassifierKind::decision_tree, fx.train, opt);
  const std::string path = tmp_path("header");
  save_model(*model, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "# flexsign-model v1");
  REQUIRE(std::getline(in, line));
  CHECK(line == "kind dt");
  REQUIRE(std::getline(in, line));
  CHECK(line == "vocabulary hello,welcome,hru,canIHelpU,whatsup");
  REQUIRE(std::getline(in, line));
  CHECK(line == "dim 57");
  std::remove(path.c_str());
}

TEST_CASE("loading rejects unknown versions, kinds and truncated files") {
  SUBCASE("wrong version line") {
    std::istringstream in("# flexsign-model v2\nkind dt\n");
    CHECK_THROWS_WITH_AS(load_model_stream(in, "fixture"), doctest::Contains("version"),
                         ModelError);
  }
  SUBCASE("unknown kind") {
    std::istringstream in("# flexsign-model v1\nkind perceptron\nvocabulary a,b\ndim 2\n");
    CHECK_THROWS_AS(load_model_stream(in, "fixture"), ModelError);
  }
  SUBCASE("truncated mid-payload") {
    const Fixture fx;
    const std::unique_ptr<Model> model = fit(ClassifierKind::knn3, fx.train, TrainOptions{});
    const std::string path = tmp_path("trunc");
    save_model(*model, path);
    const std::string full = read_file(path);
    std::istringstream in(full.substr(0, full.size() / 2));
    CHECK_THROWS_WITH_AS(load_model_stream(in, "fixture"), doctest::Contains("unexpected end"),
                         ModelError);
    std::remove(path.c_str());
  }
  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_model("/nonexistent/paths/model.txt"), IoError);
  }
  SUBCASE("neighbor count must match the declared kind") {
    std::istringstream in(
        "# flexsign-model v1\nkind knn5\nvocabulary a,b\ndim 1\nk 3\nrows 1\n0 0.5\n");
    CHECK_THROWS_WITH_AS(load_model_stream(in, "fixture"), doctest::Contains("does not match"),
                         ModelError);
  }
  SUBCASE("labels outside the vocabulary are rejected") {
    std::istringstream in(
        "# flexsign-model v1\nkind knn3\nvocabulary a,b\ndim 1\nk 3\nrows 1\n7 0.5\n");
    CHECK_THROWS_WITH_AS(load_model_stream(in, "fixture"), doctest::Contains("out of range"),
                         ModelError);
  }
  SUBCASE("malformed numbers are rejected") {
    std::istringstream in(
        "# flexsign-model v1\nkind knn3\nvocabulary a,b\ndim 1\nk 3\nrows 1\n0 abc\n");
    CHECK_THROWS_AS(load_model_stream(in, "fixture"), ModelError);
  }
}

TEST_CASE("a loaded model enforces its dimension") {
  const Fixture fx;
  const std::unique_ptr<Model> model = fit(ClassifierKind::knn5, fx.train, TrainOptions{});
  const std::string path = tmp_path("dim");
  save_model(*model, path);
  const std::unique_ptr<Model> loaded = load_model(path);
  CHECK_THROWS_AS(loaded->predict(std::vector<double>(3, 0.0)), ModelError);
  CHECK_NOTHROW(loaded->predict(std::vector<double>(57, 0.0)));
  std::remove(path.c_str());
}

TEST_CASE("classifier names map both ways") {
  for (ClassifierKind kind : all_classifiers()) {
    CHECK(classifier_from_name(classifier_name(kind)) == kind);
  }
  CHECK_THROWS_AS(classifier_from_name("nonsense"), DataError);
  CHECK(std::string(classifier_name(ClassifierKind::random_forest)) == "rf");
  CHECK(std::string(classifier_name(ClassifierKind::svm_rbf)) == "svm");
  CHECK(std::string(classifier_name(ClassifierKind::knn5)) == "knn5");
  CHECK(std::string(classifier_name(ClassifierKind::knn3)) == "knn3");
  CHECK(std::string(classifier_name(ClassifierKind::logistic_regression)) == "logreg");
  CHECK(std::string(classifier_name(ClassifierKind::decision_tree)) == "dt");
}

TEST_CASE("quarantined samples never reach the training matrix") {
  Fixture fx;
  const std::size_t before = fx.train.samples.size();
  fx.train.samples[0].quality = Quality::quarantined;
  fx.train.samples[7].quality = Quality::quarantined;
  const TrainMatrix m = to_matrix(fx.train);
  CHECK(m.rows() == before - 2);
  // repaired samples stay
  fx.train.samples[1].quality = Quality::repaired;
  CHECK(to_matrix(fx.train).rows() == before - 2);
}
