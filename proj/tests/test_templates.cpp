#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "flexsign/core.hpp"
#include "flexsign/errors.hpp"
#include "flexsign/synth.hpp"

using namespace flexsign;

namespace {

std::string tmp_path(const char* name) {
  return std::string("/tmp/flexsign_templates_") + name + "_" + std::to_string(getpid());
}

}  // namespace

TEST_CASE("built-in library defines the full 23-sign vocabulary in order") {
  const auto [vocab, templates] = make_default_vocabulary();
  REQUIRE(vocab.size() == 23);
  REQUIRE(templates.size() == 23);
  const std::vector<std::string> expected = {
      "hello",   "welcome",     "hru",          "canIHelpU", "whatsup",    "busy",
      "nothing", "yes",         "no",           "deaf",      "hardHearing", "learn",
      "ASL",     "want",        "sorry",        "please",    "CULater",    "ok",
      "notALot", "signLanguage", "have",        "nice2meetu", "extra01"};
  REQUIRE(expected.size() == 23);
  CHECK(vocab.signs() == expected);
  for (int k = 0; k < vocab.size(); ++k) {
    CHECK(templates[static_cast<std::size_t>(k)].notation == expected[static_cast<std::size_t>(k)]);
    CHECK(vocab.index_of(expected[static_cast<std::size_t>(k)]) == k);
  }
  CHECK(vocab.index_of("hello") == 0);
  CHECK(vocab.index_of("extra01") == 22);
  CHECK(vocab.index_of("unknown") == -1);
  for (const auto& t : templates) CHECK_NOTHROW(t.validate());
}

TEST_CASE("rendering hits the authored keypoint levels at start, middle and end") {
  const auto [vocab, templates] = make_default_vocabulary();
  const GestureWindow hello = render_template(templates[0], 19);
  REQUIRE(hello.instants() == 19);
  REQUIRE(hello.channels() == 3);
  // instants 0, 9, 18 fall exactly on phases 0, 0.5, 1
  CHECK(hello.at(0, 0) == 0.15);
  CHECK(hello.at(9, 0) == 0.85);
  CHECK(hello.at(18, 0) == 0.5);
  CHECK(hello.at(0, 1) == 0.15);
  CHECK(hello.at(9, 1) == 0.15);
  CHECK(hello.at(18, 1) == 0.15);
  CHECK(hello.at(9, 2) == 0.5);
  for (const auto& t : templates) {
    const GestureWindow w = render_template(t, 19);
    for (double v : w.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // first rendered instant is the phase-0 posture, exactly
    for (int c = 0; c < 3; ++c) {
      CHECK(w.at(0, c) == t.channels[static_cast<std::size_t>(c)].front().value);
      CHECK(w.at(18, c) == t.channels[static_cast<std::size_t>(c)].back().value);
    }
  }
}

TEST_CASE("every pair of signs is well separated somewhere in the window") {
  const auto [vocab, templates] = make_default_vocabulary();
  std::vector<GestureWindow> rendered;
  for (const auto& t : templates) rendered.push_back(render_template(t, 19));
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    for (std::size_t j = i + 1; j < rendered.size(); ++j) {
      double max_diff = 0.0;
      for (std::size_t k = 0; k < rendered[i].values().size(); ++k) {
        max_diff = std::max(max_diff,
                            std::abs(rendered[i].values()[k] - rendered[j].values()[k]));
      }
      INFO("pair " << templates[i].notation << " / " << templates[j].notation);
      CHECK(max_diff >= 0.15);
    }
  }
}

TEST_CASE("every sign moves early enough for onset but never jumps like a spike") {
  const auto [vocab, templates] = make_default_vocabulary();
  for (const auto& t : templates) {
    const GestureWindow w = render_template(t, 19);
    double first_step = 0.0;
    double max_step = 0.0;
    for (int c = 0; c < w.channels(); ++c) {
      first_step = std::max(first_step, std::abs(w.at(1, c) - w.at(0, c)));
      for (int i = 1; i < w.instants(); ++i) {
        max_step = std::max(max_step, std::abs(w.at(i, c) - w.at(i - 1, c)));
      }
    }
    INFO("sign " << t.notation);
    CHECK(first_step >= 0.05);  // wakes the onset detector within one frame
    CHECK(max_step <= 0.15);    // stays far below the spike-cleaning threshold
  }
}

TEST_CASE("hru and nice2meetu share a thumb and differ on the other channels") {
  const auto [vocab, templates] = make_default_vocabulary();
  const int a = vocab.index_of("hru");
  const int b = vocab.index_of("nice2meetu");
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  const GestureWindow wa = render_template(templates[static_cast<std::size_t>(a)], 19);
  const GestureWindow wb = render_template(templates[static_cast<std::size_t>(b)], 19);
  double thumb_diff = 0.0;
  double elbow_diff = 0.0;
  for (int i = 0; i < 19; ++i) {
    thumb_diff = std::max(thumb_diff, std::abs(wa.at(i, 1) - wb.at(i, 1)));
    elbow_diff = std::max(elbow_diff, std::abs(wa.at(i, 0) - wb.at(i, 0)));
  }
  CHECK(thumb_diff < 0.08);
  CHECK(elbow_diff >= 0.35);
}

TEST_CASE("a pure ramp renders to exact fractions of the window") {
  SignTemplate ramp;
  ramp.notation = "ramp";
  ramp.channels = {{{0.0, 0.0}, {1.0, 1.0}},
                   {{0.0, 0.5}, {1.0, 0.5}},
                   {{0.0, 1.0}, {1.0, 0.0}}};
  const GestureWindow w = render_template(ramp, 19);
  for (int i = 0; i < 19; ++i) {
    const double phase = static_cast<double>(i) / 18.0;
    CHECK(w.at(i, 0) == phase);
    CHECK(w.at(i, 1) == 0.5);
    CHECK(w.at(i, 2) == 1.0 - 1.0 * phase);
  }
}

TEST_CASE("a mid-gesture apex keypoint is hit exactly by the middle instant") {
  SignTemplate apex;
  apex.notation = "apex";
  apex.channels = {{{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}},
                   {{0.0, 0.0}, {1.0, 0.0}},
                   {{0.0, 0.0}, {1.0, 0.0}}};
  const GestureWindow w = render_template(apex, 19);
  CHECK(w.at(9, 0) == 1.0);
  CHECK(w.at(0, 0) == 0.0);
  CHECK(w.at(18, 0) == 0.0);
  // symmetric rise and fall
  for (int i = 0; i < 9; ++i) CHECK(w.at(i, 0) == doctest::Approx(w.at(18 - i, 0)).epsilon(1e-15));
}

TEST_CASE("template files round-trip losslessly") {
  const auto [vocab, templates] = make_default_vocabulary();
  const std::string path = tmp_path("roundtrip");
  write_templates_file(templates, path);
  const std::vector<SignTemplate> back = read_templates_file(path);
  CHECK(back == templates);
  std::remove(path.c_str());
}

TEST_CASE("the shipped template file matches the built-in library byte for byte") {
  const std::string shipped = read_file(std::string(FLEXSIGN_DATA_DIR) + "/default_templates.txt");
  CHECK(shipped == default_templates_text());
}

TEST_CASE("template parser rejects malformed input with line numbers") {
  auto parse_str = [](const std::string& text) {
    std::istringstream in(text);
    return parse_templates(in, "fixture");
  };

  SUBCASE("missing version line") {
    CHECK_THROWS_WITH_AS(parse_str("sign hello\n"), doctest::Contains("version"), DataError);
  }
  SUBCASE("channel out of order") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nthumb 0:0 1:1\nelbow 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("line 3"), DataError);
  }
  SUBCASE("non-increasing phases") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nelbow 0:0 0.5:1 0.5:0.2 1:1\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("strictly increasing"), DataError);
  }
  SUBCASE("value out of range") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nelbow 0:0 1:1.2\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("out of [0, 1]"), DataError);
  }
  SUBCASE("first phase not zero") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nelbow 0.1:0 1:1\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("phase 0"), DataError);
  }
  SUBCASE("last phase not one") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nelbow 0:0 0.9:1\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("phase 1"), DataError);
  }
  SUBCASE("too few channel lines") {
    const std::string text = "# flexsign-templates v1\nsign a\nelbow 0:0 1:1\nsign b\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("channel lines"), DataError);
  }
  SUBCASE("keypoint token without colon") {
    const std::string text =
        "# flexsign-templates v1\nsign a\nelbow 0:0 nonsense 1:1\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("phase:value"), DataError);
  }
  SUBCASE("duplicate sign") {
    const std::string block = "elbow 0:0 1:1\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    const std::string text =
        "# flexsign-templates v1\nsign a\n" + block + "sign a\n" + block;
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("duplicate"), DataError);
  }
  SUBCASE("data before any sign") {
    const std::string text = "# flexsign-templates v1\nelbow 0:0 1:1\n";
    CHECK_THROWS_WITH_AS(parse_str(text), doctest::Contains("line 2"), DataError);
  }
  SUBCASE("empty file") {
    CHECK_THROWS_AS(parse_str(""), DataError);
  }
  SUBCASE("comments and blank lines are ignored") {
    const std::string text =
        "# flexsign-templates v1\n\n# a remark\nsign a\nelbow 0:0 1:1\nthumb 0:0 1:1\n\nmiddle 0:0 1:1\n"
        "\nsign b\nelbow 0:1 1:0\nthumb 0:0 1:1\nmiddle 0:0 1:1\n";
    const auto ts = parse_str(text);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].notation == "a");
    CHECK(ts[1].notation == "b");
  }
}

TEST_CASE("render rejects degenerate requests") {
  const auto [vocab, templates] = make_default_vocabulary();
  CHECK_THROWS_AS(render_template(templates[0], 1), DataError);
  SignTemplate bad;
  bad.notation = "bad";
  bad.channels = {{{0.0, 0.0}, {1.0, 1.0}}, {{0.0, 0.0}, {1.0, 1.0}}};
  CHECK_THROWS_AS(render_template(bad, 19), DataError);  // only two channels
}
