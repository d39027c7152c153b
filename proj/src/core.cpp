#include "flexsign/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flexsign/errors.hpp"
#include "flexsign/rng.hpp"

namespace flexsign {

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string expected_header(int instants, int channels) {
  std::string h = "label,quality";
  char buf[32];
  for (int t = 0; t < instants; ++t) {
    for (int c = 0; c < channels; ++c) {
      std::snprintf(buf, sizeof buf, ",c%d_t%02d", c, t);
      h += buf;
    }
  }
  return h;
}

}  // namespace

const char* channel_name(int channel) {
  static thread_local char buf[16];
  if (channel >= 0 && channel < 3) return kChannelNames[channel];
  std::snprintf(buf, sizeof buf, "ch%d", channel);
  return buf;
}

double normalize_reading(int raw) {
  if (raw < 0 || raw > kAdcFullScale)
    throw DataError("reading " + std::to_string(raw) + " outside ADC range 0.." +
                    std::to_string(kAdcFullScale));
  return static_cast<double>(raw) / kAdcFullScale;
}

int to_adc(double value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw DataError("normalized value " + format_real(value) + " outside [0,1]");
  return static_cast<int>(std::lround(value * kAdcFullScale));
}

Vocabulary::Vocabulary(std::vector<std::string> signs) : signs_(std::move(signs)) {
  if (signs_.size() < 2) throw DataError("vocabulary needs at least 2 signs");
  for (const auto& s : signs_) {
    if (s.empty()) throw DataError("vocabulary contains an empty notation");
    for (unsigned char ch : s) {
      // printable ASCII, no separators: notations appear in CSV columns
      if (ch <= ' ' || ch > '~' || ch == ',')
        throw DataError("notation '" + s + "' has characters outside the allowed set");
    }
  }
  auto sorted = signs_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DataError("vocabulary contains duplicate notations");
}

const std::string& Vocabulary::notation(int label) const {
  if (label < 0 || label >= size())
    throw DataError("label " + std::to_string(label) + " outside vocabulary of " +
                    std::to_string(size()));
  return signs_[static_cast<std::size_t>(label)];
}

int Vocabulary::index_of(const std::string& notation) const {
  for (std::size_t i = 0; i < signs_.size(); ++i)
    if (signs_[i] == notation) return static_cast<int>(i);
  return -1;
}

GestureWindow::GestureWindow(int instants, int channels)
    : instants_(instants), channels_(channels) {
  if (instants < 1 || channels < 1) throw DataError("window shape must be positive");
  values_.assign(static_cast<std::size_t>(instants) * channels, 0.0);
}

GestureWindow::GestureWindow(int instants, int channels, std::vector<double> values)
    : instants_(instants), channels_(channels), values_(std::move(values)) {
  if (instants < 1 || channels < 1) throw DataError("window shape must be positive");
  if (values_.size() != static_cast<std::size_t>(instants) * channels)
    throw DataError("window value count does not match shape");
  for (double v : values_)
    if (!(v >= 0.0 && v <= 1.0))
      throw DataError("window value " + format_real(v) + " outside [0,1]");
}

double GestureWindow::at(int instant, int channel) const {
  return values_[static_cast<std::size_t>(instant) * channels_ + channel];
}

void GestureWindow::set(int instant, int channel, double value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw DataError("window value " + format_real(value) + " outside [0,1]");
  values_[static_cast<std::size_t>(instant) * channels_ + channel] = value;
}

std::vector<double> flatten_window(const GestureWindow& w) { return w.values(); }

GestureWindow window_from_flat(int instants, int channels,
                               const std::vector<double>& flat) {
  return GestureWindow(instants, channels, flat);
}

const char* quality_name(Quality q) {
  switch (q) {
    case Quality::clean: return "clean";
    case Quality::repaired: return "repaired";
    case Quality::quarantined: return "quarantined";
  }
  return "clean";
}

Quality quality_from_name(const std::string& name) {
  if (name == "clean") return Quality::clean;
  if (name == "repaired") return Quality::repaired;
  if (name == "quarantined") return Quality::quarantined;
  throw DataError("unknown quality flag '" + name + "'");
}

void Dataset::validate() const {
  if (vocabulary.size() < 2) throw DataError("dataset vocabulary needs at least 2 signs");
  if (meta.find('\n') != std::string::npos)
    throw DataError("dataset meta must be a single line");
  if (samples.empty()) return;
  const int t = samples.front().window.instants();
  const int c = samples.front().window.channels();
  for (const auto& s : samples) {
    if (s.window.instants() != t || s.window.channels() != c)
      throw DataError("dataset windows have mixed shapes");
    if (s.label < 0 || s.label >= vocabulary.size())
      throw DataError("sample label " + std::to_string(s.label) +
                      " outside vocabulary of " + std::to_string(vocabulary.size()));
  }
}

SplitIndices shuffle_split(std::size_t n, double ratio, std::uint64_t seed) {
  if (n < 2) throw DataError("cannot split fewer than 2 samples");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DataError("split ratio must be strictly between 0 and 1");
  // tiny epsilon absorbs binary representation error in ratio * n
  const auto train_n = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  if (train_n == 0 || train_n >= n)
    throw DataError("degenerate split: one side would be empty");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.next_below(i + 1);
    std::swap(perm[i], perm[j]);
  }

  SplitIndices out;
  out.seed = seed;
  out.ratio = ratio;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_n));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_n), perm.end());
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& token, const std::string& where) {
  if (token.empty()) throw DataError(where + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw DataError(where + ": '" + token + "' is not a number");
  if (!std::isfinite(v)) throw DataError(where + ": non-finite value");
  return v;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move temporary file onto '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_dataset_stream(const Dataset& d, std::ostream& out) {
  d.validate();
  if (d.samples.empty()) throw DataError("refusing to write an empty dataset");
  const int t = d.samples.front().window.instants();
  const int c = d.samples.front().window.channels();

  out << "# flexsign-dataset v1\n# channels ";
  for (int i = 0; i < c; ++i) out << (i ? "," : "") << channel_name(i);
  out << "\n# instants " << t << "\n# vocabulary ";
  for (int i = 0; i < d.vocabulary.size(); ++i)
    out << (i ? "," : "") << d.vocabulary.signs()[static_cast<std::size_t>(i)];
  out << "\n# meta " << d.meta << "\n";
  out << expected_header(t, c) << "\n";

  for (const auto& s : d.samples) {
    out << d.vocabulary.notation(s.label) << ',' << quality_name(s.quality);
    for (double v : s.window.values()) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_dataset(const Dataset& d, const std::string& path) {
  std::ostringstream ss;
  write_dataset_stream(d, ss);
  write_file_atomic(path, ss.str());
}

namespace {

struct CsvHead {
  int instants = 0;
  int channels = 0;
  Vocabulary vocabulary;
  std::string meta;
  std::size_t line_no = 0;  // lines consumed so far
};

std::string take_prefixed(const std::string& line, const std::string& prefix,
                          const std::string& name, std::size_t line_no) {
  if (line.rfind(prefix, 0) != 0)
    throw DataError("line " + std::to_string(line_no) + ": expected " + name + " line");
  return line.substr(prefix.size());
}

CsvHead read_csv_head(std::istream& in, const std::string& name) {
  CsvHead h;
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line))
      throw DataError(name + " is truncated at line " + std::to_string(h.line_no + 1));
    ++h.line_no;
  };

  next_line();
  if (line != "# flexsign-dataset v1")
    throw DataError(name + " line 1: not a flexsign dataset (bad or missing version line)");
  next_line();
  const std::string chans = take_prefixed(line, "# channels ", "channels", h.line_no);
  h.channels = static_cast<int>(split_on(chans, ',').size());
  next_line();
  const std::string inst = take_prefixed(line, "# instants ", "instants", h.line_no);
  h.instants = static_cast<int>(parse_real(inst, name + " line " + std::to_string(h.line_no)));
  if (h.instants < 1 || h.channels < 1)
    throw DataError(name + ": non-positive window shape in header");
  next_line();
  const std::string vocab = take_prefixed(line, "# vocabulary ", "vocabulary", h.line_no);
  h.vocabulary = Vocabulary(split_on(vocab, ','));
  next_line();
  h.meta = take_prefixed(line, "# meta", "meta", h.line_no);
  if (!h.meta.empty() && h.meta.front() == ' ') h.meta.erase(0, 1);
  next_line();
  if (line != expected_header(h.instants, h.channels))
    throw DataError(name + " line " + std::to_string(h.line_no) +
                    ": column header does not match the declared window shape");
  return h;
}

}  // namespace

Dataset read_dataset_stream(std::istream& in, const std::string& name) {
  CsvHead head = read_csv_head(in, name);
  Dataset d;
  d.vocabulary = head.vocabulary;
  d.meta = head.meta;

  const std::size_t want = 2 + static_cast<std::size_t>(head.instants) * head.channels;
  std::string line;
  while (std::getline(in, line)) {
    ++head.line_no;
    if (line.empty()) continue;
    const std::string where = name + " line " + std::to_string(head.line_no);
    const auto fields = split_on(line, ',');
    if (fields.size() != want)
      throw DataError(where + ": expected " + std::to_string(want) + " columns, got " +
                      std::to_string(fields.size()));
    LabeledSample s;
    s.label = d.vocabulary.index_of(fields[0]);
    if (s.label < 0) throw DataError(where + ": unknown label '" + fields[0] + "'");
    s.quality = quality_from_name(fields[1]);
    std::vector<double> vals(want - 2);
    for (std::size_t i = 2; i < want; ++i) {
      const double v = parse_real(fields[i], where);
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError(where + ": value " + fields[i] + " outside [0,1]");
      vals[i - 2] = v;
    }
    s.window = GestureWindow(head.instants, head.channels, std::move(vals));
    d.samples.push_back(std::move(s));
  }
  d.validate();
  return d;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_dataset_stream(in, path);
}

std::vector<GestureWindow> read_windows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvHead head = read_csv_head(in, path);

  const std::size_t want = 2 + static_cast<std::size_t>(head.instants) * head.channels;
  std::vector<GestureWindow> out;
  std::string line;
  while (std::getline(in, line)) {
    ++head.line_no;
    if (line.empty()) continue;
    const std::string where = path + " line " + std::to_string(head.line_no);
    const auto fields = split_on(line, ',');
    if (fields.size() != want)
      throw DataError(where + ": expected " + std::to_string(want) + " columns, got " +
                      std::to_string(fields.size()));
    std::vector<double> vals(want - 2);
    for (std::size_t i = 2; i < want; ++i) {
      const double v = parse_real(fields[i], where);
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError(where + ": value " + fields[i] + " outside [0,1]");
      vals[i - 2] = v;
    }
    out.emplace_back(head.instants, head.channels, std::move(vals));
  }
  return out;
}

Vocabulary read_vocabulary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> signs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    signs.push_back(line);
  }
  return Vocabulary(std::move(signs));
}

void write_vocabulary_file(const Vocabulary& v, const std::string& path) {
  std::string out;
  for (const auto& s : v.signs()) {
    out += s;
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace flexsign
