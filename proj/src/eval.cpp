#include "flexsign/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "flexsign/errors.hpp"

namespace flexsign {
namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

long long parse_count(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used != token.size() || v < 0) throw DataError(where + ": bad count '" + token + "'");
    return v;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    throw DataError(where + ": bad count '" + token + "'");
  }
}

// Linear ramp from near-white (count 0) to a deep blue (the cell maximum).
std::string heat_color(long long count, long long max_count) {
  const double t = max_count > 0 ? static_cast<double>(count) / static_cast<double>(max_count) : 0.0;
  const auto lerp = [t](int lo, int hi) { return static_cast<int>(lo + t * (hi - lo) + 0.5); };
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", lerp(247, 8), lerp(251, 72), lerp(255, 140));
  return buf;
}

}  // namespace

long long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

long long ConfusionMatrix::diagonal() const {
  long long d = 0;
  for (int c = 0; c < classes; ++c) d += at(c, c);
  return d;
}

long long ConfusionMatrix::row_sum(int c) const {
  long long s = 0;
  for (int p = 0; p < classes; ++p) s += at(c, p);
  return s;
}

long long ConfusionMatrix::col_sum(int c) const {
  long long s = 0;
  for (int a = 0; a < classes; ++a) s += at(a, c);
  return s;
}

ConfusionMatrix make_confusion(const std::vector<int>& actual, const std::vector<int>& predicted,
                               int classes) {
  if (classes <= 0) throw DataError("confusion matrix needs at least one class");
  if (actual.size() != predicted.size())
    throw DataError("confusion matrix: actual and predicted lengths differ");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const int a = actual[i];
    const int p = predicted[i];
    if (a < 0 || a >= classes || p < 0 || p >= classes)
      throw DataError("confusion matrix: label out of range");
    ++cm.at(a, p);
  }
  return cm;
}

ConfusionMatrix confusion(const Dataset& test, const Model& m) {
  if (test.vocabulary != m.vocabulary())
    throw ModelError("evaluation dataset vocabulary does not match the model");
  const TrainMatrix tm = to_matrix(test);
  const std::vector<int> predicted = m.predict_rows(tm);
  return make_confusion(tm.y, predicted, test.vocabulary.size());
}

EvalReport metrics(const ConfusionMatrix& cm) {
  if (cm.classes <= 0 || cm.total() == 0) throw DataError("cannot score an empty confusion matrix");
  EvalReport r;
  r.confusion = cm;
  r.total = cm.total();
  r.accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(r.total);
  r.per_class.resize(cm.classes);
  for (int c = 0; c < cm.classes; ++c) {
    ClassMetrics& pm = r.per_class[c];
    const long long tp = cm.at(c, c);
    const long long rs = cm.row_sum(c);
    const long long cs = cm.col_sum(c);
    pm.support = rs;
    pm.precision_defined = cs > 0;
    pm.recall_defined = rs > 0;
    pm.precision = cs > 0 ? static_cast<double>(tp) / static_cast<double>(cs) : 0.0;
    pm.recall = rs > 0 ? static_cast<double>(tp) / static_cast<double>(rs) : 0.0;
    const double pr = pm.precision + pm.recall;
    pm.f1 = pr > 0.0 ? 2.0 * pm.precision * pm.recall / pr : 0.0;
    const double w = static_cast<double>(rs) / static_cast<double>(r.total);
    r.weighted_precision += w * pm.precision;
    r.weighted_recall += w * pm.recall;
    r.weighted_f1 += w * pm.f1;
  }
  return r;
}

EvalReport evaluate(const Dataset& test, const Model& m) {
  EvalReport r = metrics(confusion(test, m));
  r.model = classifier_name(m.kind());
  r.non_converged = !m.converged();
  return r;
}

void write_report(const EvalReport& r, const Vocabulary& v, const std::string& path) {
  if (v.size() != r.confusion.classes)
    throw DataError("report vocabulary size does not match the confusion matrix");
  std::ostringstream out;
  out << "# flexsign-eval v1\n";
  out << "# confusion rows=actual cols=predicted\n";
  out << "model " << (r.model.empty() ? "-" : r.model) << "\n";
  out << "non_converged " << (r.non_converged ? 1 : 0) << "\n";
  out << "classes " << r.confusion.classes << "\n";
  out << "vocabulary ";
  for (int c = 0; c < v.size(); ++c) out << (c ? "," : "") << v.notation(c);
  out << "\n";
  out << "total " << r.total << "\n";
  out << "accuracy " << format_real(r.accuracy) << "\n";
  out << "weighted_precision " << format_real(r.weighted_precision) << "\n";
  out << "weighted_recall " << format_real(r.weighted_recall) << "\n";
  out << "weighted_f1 " << format_real(r.weighted_f1) << "\n";
  for (int c = 0; c < r.confusion.classes; ++c) {
    const ClassMetrics& pm = r.per_class[c];
    out << "class " << c << " " << v.notation(c) << " precision " << format_real(pm.precision)
        << " recall " << format_real(pm.recall) << " f1 " << format_real(pm.f1) << " support "
        << pm.support << " defined " << (pm.precision_defined ? 1 : 0) << " "
        << (pm.recall_defined ? 1 : 0) << "\n";
  }
  for (int a = 0; a < r.confusion.classes; ++a) {
    out << "row " << a;
    for (int p = 0; p < r.confusion.classes; ++p) out << " " << r.confusion.at(a, p);
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

EvalReport read_report(const std::string& path, Vocabulary* vocab_out) {
  std::istringstream in(read_file(path));
  const auto fail = [&path](const std::string& why) -> DataError {
    return DataError(path + ": " + why);
  };
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "# flexsign-eval v1")
    throw fail("not a flexsign evaluation report");

  EvalReport r;
  std::vector<std::string> vocab_names;
  int classes = -1;
  const auto next_tokens = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      line = strip_cr(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      return toks;
    }
    return {};
  };

  const auto expect_pair = [&](const char* key) -> std::string {
    const auto toks = next_tokens();
    if (toks.size() != 2 || toks[0] != key)
      throw fail(std::string("expected '") + key + " <value>'");
    return toks[1];
  };

  r.model = expect_pair("model");
  if (r.model == "-") r.model.clear();
  r.non_converged = parse_count(expect_pair("non_converged"), path) != 0;
  classes = static_cast<int>(parse_count(expect_pair("classes"), path));
  if (classes <= 0) throw fail("bad class count");
  vocab_names = split_on(expect_pair("vocabulary"), ',');
  if (static_cast<int>(vocab_names.size()) != classes)
    throw fail("vocabulary size does not match the class count");
  r.total = parse_count(expect_pair("total"), path);
  r.accuracy = parse_real(expect_pair("accuracy"), path);
  r.weighted_precision = parse_real(expect_pair("weighted_precision"), path);
  r.weighted_recall = parse_real(expect_pair("weighted_recall"), path);
  r.weighted_f1 = parse_real(expect_pair("weighted_f1"), path);

  r.per_class.resize(classes);
  for (int c = 0; c < classes; ++c) {
    const auto toks = next_tokens();
    // class <idx> <name> precision <p> recall <r> f1 <f> support <n> defined <pd> <rd>
    if (toks.size() != 14 || toks[0] != "class" || toks[3] != "precision" || toks[5] != "recall" ||
        toks[7] != "f1" || toks[9] != "support" || toks[11] != "defined")
      throw fail("malformed class metrics line");
    if (parse_count(toks[1], path) != c) throw fail("class metrics out of order");
    if (toks[2] != vocab_names[c]) throw fail("class name does not match the vocabulary");
    ClassMetrics& pm = r.per_class[c];
    pm.precision = parse_real(toks[4], path);
    pm.recall = parse_real(toks[6], path);
    pm.f1 = parse_real(toks[8], path);
    pm.support = parse_count(toks[9 + 1], path);
    pm.precision_defined = parse_count(toks[12], path) != 0;
    pm.recall_defined = parse_count(toks[13], path) != 0;
  }

  r.confusion = ConfusionMatrix(classes);
  for (int a = 0; a < classes; ++a) {
    const auto toks = next_tokens();
    if (toks.size() != static_cast<std::size_t>(classes) + 2 || toks[0] != "row")
      throw fail("malformed confusion row");
    if (parse_count(toks[1], path) != a) throw fail("confusion rows out of order");
    for (int p = 0; p < classes; ++p) r.confusion.at(a, p) = parse_count(toks[2 + p], path);
  }
  if (vocab_out) *vocab_out = Vocabulary(vocab_names);
  return r;
}

void write_confusion_csv(const ConfusionMatrix& cm, const Vocabulary& v, const std::string& path) {
  if (v.size() != cm.classes)
    throw DataError("confusion CSV vocabulary size does not match the matrix");
  std::ostringstream out;
  out << "# flexsign-confusion v1 rows=actual cols=predicted\n";
  out << "actual";
  for (int p = 0; p < cm.classes; ++p) out << "," << v.notation(p);
  out << "\n";
  for (int a = 0; a < cm.classes; ++a) {
    out << v.notation(a);
    for (int p = 0; p < cm.classes; ++p) out << "," << cm.at(a, p);
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

ConfusionMatrix read_confusion_csv(const std::string& path, Vocabulary* vocab_out) {
  std::istringstream in(read_file(path));
  const auto fail = [&path](const std::string& why) -> DataError {
    return DataError(path + ": " + why);
  };
  std::string line;
  if (!std::getline(in, line) ||
      strip_cr(line) != "# flexsign-confusion v1 rows=actual cols=predicted")
    throw fail("not a flexsign confusion CSV");
  if (!std::getline(in, line)) throw fail("missing header row");
  const auto header = split_on(strip_cr(line), ',');
  if (header.size() < 2 || header[0] != "actual") throw fail("malformed header row");
  const int classes = static_cast<int>(header.size()) - 1;
  std::vector<std::string> names(header.begin() + 1, header.end());

  ConfusionMatrix cm(classes);
  for (int a = 0; a < classes; ++a) {
    if (!std::getline(in, line)) throw fail("truncated matrix");
    const auto cells = split_on(strip_cr(line), ',');
    if (cells.size() != static_cast<std::size_t>(classes) + 1) throw fail("malformed matrix row");
    if (cells[0] != names[a]) throw fail("row label order does not match the header");
    for (int p = 0; p < classes; ++p) cm.at(a, p) = parse_count(cells[1 + p], path);
  }
  if (vocab_out) *vocab_out = Vocabulary(names);
  return cm;
}

void write_confusion_svg(const ConfusionMatrix& cm, const Vocabulary& v, const std::string& path) {
  if (v.size() != cm.classes)
    throw DataError("confusion SVG vocabulary size does not match the matrix");
  const int cell = 24;
  const int margin = 110;  // room for the labels
  const int side = margin + cm.classes * cell + 10;
  long long max_count = 0;
  for (long long c : cm.counts) max_count = std::max(max_count, c);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
      << "\" font-family=\"monospace\" font-size=\"11\">\n";
  out << "  <title>confusion matrix (rows = actual, columns = predicted)</title>\n";
  out << "  <text x=\"" << margin << "\" y=\"14\">rows = actual, columns = predicted</text>\n";
  for (int a = 0; a < cm.classes; ++a) {
    const int y = margin + a * cell;
    out << "  <text x=\"4\" y=\"" << (y + cell - 8) << "\">" << v.notation(a) << "</text>\n";
    for (int p = 0; p < cm.classes; ++p) {
      const int x = margin + p * cell;
      out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"" << heat_color(cm.at(a, p), max_count)
          << "\" stroke=\"#cccccc\" data-count=\"" << cm.at(a, p) << "\"><title>" << v.notation(a)
          << " -> " << v.notation(p) << ": " << cm.at(a, p) << "</title></rect>\n";
    }
  }
  for (int p = 0; p < cm.classes; ++p) {
    const int x = margin + p * cell;
    out << "  <text x=\"" << (x + cell / 2) << "\" y=\"" << (margin - 6) << "\" transform=\"rotate(-60 "
        << (x + cell / 2) << " " << (margin - 6) << ")\">" << v.notation(p) << "</text>\n";
  }
  out << "</svg>\n";
  write_file_atomic(path, out.str());
}

void render_trajectory(const GestureWindow& w, const std::string& prefix) {
  if (w.instants() <= 0) throw DataError("cannot render an empty window");
  if (w.channels() != kDefaultChannels)
    throw DataError("trajectory rendering expects the three sensor channels");
  std::ostringstream series;
  series << "instant";
  for (int c = 0; c < w.channels(); ++c) series << "," << channel_name(c);
  series << "\n";
  std::ostringstream poly;
  poly << "x,y,z\n";
  for (int t = 0; t < w.instants(); ++t) {
    series << t;
    for (int c = 0; c < w.channels(); ++c) series << "," << format_real(w.at(t, c));
    series << "\n";
    poly << format_real(w.at(t, 0)) << "," << format_real(w.at(t, 1)) << ","
         << format_real(w.at(t, 2)) << "\n";
  }
  write_file_atomic(prefix + "_series.csv", series.str());
  write_file_atomic(prefix + "_polyline.csv", poly.str());
}

void render_trajectories(const std::vector<GestureWindow>& windows, const std::string& prefix) {
  char suffix[16];
  for (std::size_t i = 0; i < windows.size(); ++i) {
    std::snprintf(suffix, sizeof(suffix), "_%03zu", i);
    render_trajectory(windows[i], prefix + suffix);
  }
}

std::string report_summary(const EvalReport& r) {
  std::ostringstream out;
  if (!r.model.empty()) out << r.model << " ";
  out << "accuracy " << format_real(r.accuracy) << " over " << r.total
      << " samples, weighted f1 " << format_real(r.weighted_f1);
  if (r.non_converged) out << " (trainer did not converge)";
  return out.str();
}

}  // namespace flexsign
