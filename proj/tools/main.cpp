// flexsign - command-line front end for the gesture recognition pipeline.
//
// Subcommands cover the full chain: synthesize a dataset, clean it, split it,
// train a classifier, evaluate it, and run live recognition against a frame
// stream. Every subcommand reads and validates its inputs before producing
// any output file, and all files are written atomically.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <condition_variable>
#include <csignal>
#include <cstdint>
#include <deque>
#include <exception>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flexsign/acquisition.hpp"
#include "flexsign/cleaning.hpp"
#include "flexsign/core.hpp"
#include "flexsign/errors.hpp"
#include "flexsign/eval.hpp"
#include "flexsign/learn.hpp"
#include "flexsign/rng.hpp"
#include "flexsign/synth.hpp"

namespace {

using namespace flexsign;

// --- shared option bundles ---------------------------------------------------

struct NoiseOpts {
  double amp = 0.03;
  double jitter = 0.02;
  double offset = 0.02;
  double spike_prob = 0.0;
  double dropout_prob = 0.0;
};

void add_noise_flags(CLI::App* sub, NoiseOpts& n) {
  sub->add_option("--amp-noise", n.amp, "Per-instant Gaussian amplitude noise sd")
      ->capture_default_str();
  sub->add_option("--jitter", n.jitter, "Per-keypoint Gaussian phase jitter sd")
      ->capture_default_str();
  sub->add_option("--offset", n.offset, "Per-channel Gaussian level offset sd")
      ->capture_default_str();
  sub->add_option("--spike-prob", n.spike_prob, "Per-instant sensor spike probability")
      ->capture_default_str();
  sub->add_option("--dropout-prob", n.dropout_prob, "Per-sample pinned-rail dropout probability")
      ->capture_default_str();
}

GenConfig to_gen_config(const NoiseOpts& n, std::uint64_t seed, int samples_per_class) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.samples_per_class = samples_per_class;
  cfg.amp_noise_sd = n.amp;
  cfg.time_jitter_sd = n.jitter;
  cfg.offset_sd = n.offset;
  cfg.spike_prob = n.spike_prob;
  cfg.dropout_prob = n.dropout_prob;
  return cfg;
}

// Templates come from a file when given, otherwise from the built-in set.
std::pair<Vocabulary, std::vector<SignTemplate>> load_templates(const std::string& path) {
  if (path.empty()) return make_default_vocabulary();
  std::vector<SignTemplate> ts = read_templates_file(path);
  return {vocabulary_of(ts), std::move(ts)};
}

void print_class_counts(const Dataset& d) {
  std::vector<long long> counts(static_cast<std::size_t>(d.vocabulary.size()), 0);
  for (const LabeledSample& s : d.samples) ++counts[static_cast<std::size_t>(s.label)];
  for (int c = 0; c < d.vocabulary.size(); ++c)
    std::cout << d.vocabulary.notation(c) << " " << counts[static_cast<std::size_t>(c)] << "\n";
}

// --- gen ----------------------------------------------------------------------

struct GenOpts {
  std::string out;
  std::string templates;
  std::uint64_t seed = 42;
  int total = 0;  // 0: use samples_per_class
  int samples_per_class = 45;
  NoiseOpts noise;
};

void run_gen(const GenOpts& o) {
  const auto [vocab, templates] = load_templates(o.templates);
  const GenConfig cfg = to_gen_config(o.noise, o.seed, o.samples_per_class);
  const Dataset d = o.total > 0 ? synthesize_dataset_total(vocab, templates, cfg, o.total)
                                : synthesize_dataset(vocab, templates, cfg);
  write_dataset(d, o.out);
  print_class_counts(d);
  std::cout << "total " << d.samples.size() << " samples -> " << o.out << "\n";
}

// --- clean --------------------------------------------------------------------

struct CleanOpts {
  std::string in;
  std::string out;
  std::string report;
  CleaningConfig cfg;
};

void run_clean(const CleanOpts& o) {
  o.cfg.validate();
  const Dataset d = read_dataset(o.in);
  const auto [cleaned, report] = clean_dataset(d, o.cfg);
  write_dataset(cleaned, o.out);
  if (!o.report.empty()) write_cleaning_report_csv(report, o.report);
  std::cout << cleaning_summary(report) << "\n";
}

// --- split --------------------------------------------------------------------

struct SplitOpts {
  std::string in;
  std::string train_out;
  std::string test_out;
  double ratio = 0.8;
  std::uint64_t seed = 42;
};

Dataset take_subset(const Dataset& d, const std::vector<std::size_t>& idx, const char* part,
                    const SplitOpts& o) {
  Dataset out;
  out.vocabulary = d.vocabulary;
  out.meta = d.meta + " | split part=" + part + " ratio=" + format_real(o.ratio) +
             " seed=" + std::to_string(o.seed);
  out.samples.reserve(idx.size());
  for (std::size_t i : idx) out.samples.push_back(d.samples[i]);
  return out;
}

void run_split(const SplitOpts& o) {
  const Dataset d = read_dataset(o.in);
  const SplitIndices idx = shuffle_split(d.samples.size(), o.ratio, o.seed);
  write_dataset(take_subset(d, idx.train, "train", o), o.train_out);
  write_dataset(take_subset(d, idx.test, "test", o), o.test_out);
  std::cout << "train " << idx.train.size() << " -> " << o.train_out << "\n";
  std::cout << "test " << idx.test.size() << " -> " << o.test_out << "\n";
}

// --- train --------------------------------------------------------------------

struct TrainOpts2 {
  std::string model_name;
  std::string in;
  std::string out;
  TrainOptions opt;
};

void run_train(const TrainOpts2& o) {
  const ClassifierKind kind = classifier_from_name(o.model_name);
  o.opt.validate();
  const Dataset d = read_dataset(o.in);
  const std::unique_ptr<Model> m = fit(kind, d, o.opt);
  save_model(*m, o.out);
  std::cout << "trained " << classifier_name(kind) << " on " << d.samples.size()
            << " samples (dim " << m->dim() << ") -> " << o.out << "\n";
  if (!m->converged())
    std::cout << "warning: trainer hit its iteration cap before reaching tolerance\n";
}

// --- eval ---------------------------------------------------------------------

struct EvalOpts {
  std::string model;
  std::string data;
  std::string report;
  std::string confusion_csv;
  std::string confusion_svg;
};

void run_eval(const EvalOpts& o) {
  const std::unique_ptr<Model> m = load_model(o.model);
  const Dataset d = read_dataset(o.data);
  const EvalReport r = evaluate(d, *m);

  const std::string csv = o.confusion_csv.empty() ? o.report + ".confusion.csv" : o.confusion_csv;
  const std::string svg = o.confusion_svg.empty() ? o.report + ".confusion.svg" : o.confusion_svg;
  write_report(r, d.vocabulary, o.report);
  write_confusion_csv(r.confusion, d.vocabulary, csv);
  write_confusion_svg(r.confusion, d.vocabulary, svg);

  std::cout << "model " << r.model << "\n";
  std::cout << "samples " << r.total << "\n";
  std::cout << "accuracy " << format_real(r.accuracy) << "\n";
  std::cout << "weighted_f1 " << format_real(r.weighted_f1) << "\n";
  if (r.non_converged) std::cout << "warning: model was saved before its trainer converged\n";
  std::cout << "report -> " << o.report << "\n";
}

// --- predict ------------------------------------------------------------------

struct PredictOpts {
  std::string model;
  std::string data;
};

void run_predict(const PredictOpts& o) {
  const std::unique_ptr<Model> m = load_model(o.model);
  const std::vector<GestureWindow> windows = read_windows(o.data);
  if (windows.empty()) throw DataError(o.data + ": no windows to predict");
  for (const GestureWindow& w : windows)
    std::cout << m->vocabulary().notation(m->predict(flatten_window(w))) << "\n";
}

// --- stream-sim -----------------------------------------------------------------

struct StreamSimOpts {
  std::vector<std::string> signs;
  int repeat = 1;
  std::string out;
  int serve_port = -1;  // -1: file mode
  std::string bind_host = "127.0.0.1";
  std::string templates;
  std::uint64_t seed = 42;
  NoiseOpts noise;
  StreamConfig stream;
};

// Serves `text` to exactly one TCP client, then exits. Binding to port 0
// picks a free port; the chosen port is printed before accepting so callers
// can connect.
void serve_text(const std::string& bind_host, int port, const std::string& text) {
  ::signal(SIGPIPE, SIG_IGN);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("cannot create a server socket");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw DataError("bad bind address '" + bind_host + "'");
  }
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd, 1) != 0) {
    ::close(fd);
    throw IoError("cannot listen on " + bind_host + ":" + std::to_string(port));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  std::cout << "listening on " << ntohs(bound.sin_port) << "\n" << std::flush;

  const int client = ::accept(fd, nullptr, nullptr);
  if (client < 0) {
    ::close(fd);
    throw IoError("accept failed");
  }
  std::size_t sent = 0;
  while (sent < text.size()) {
    const ssize_t n = ::send(client, text.data() + sent, text.size() - sent, 0);
    if (n <= 0) {
      ::close(client);
      ::close(fd);
      throw IoError("client disconnected mid-stream");
    }
    sent += static_cast<std::size_t>(n);
  }
  ::close(client);
  ::close(fd);
}

void run_stream_sim(const StreamSimOpts& o) {
  if (o.out.empty() && o.serve_port < 0)
    throw CLI::ValidationError("stream-sim", "give either --out or --serve");
  if (o.repeat < 1) throw DataError("--repeat must be at least 1");
  o.stream.validate();
  const auto [vocab, templates] = load_templates(o.templates);
  const GenConfig cfg = to_gen_config(o.noise, o.seed, 1);
  cfg.validate();

  // Default to one pass over the whole vocabulary.
  std::vector<const SignTemplate*> script;
  const std::vector<std::string>& names =
      o.signs.empty() ? vocab.signs() : o.signs;
  for (const std::string& name : names) {
    const int label = vocab.index_of(name);
    if (label < 0) throw DataError("unknown sign '" + name + "'");
    script.push_back(&templates[static_cast<std::size_t>(label)]);
  }

  std::ostringstream wire;
  std::uint64_t t0 = 0;
  const std::uint64_t gap =
      static_cast<std::uint64_t>(std::llround(1000.0 / o.stream.frame_rate_hz));
  std::size_t frame_count = 0;
  std::uint64_t sample_index = 0;
  for (int rep = 0; rep < o.repeat; ++rep) {
    for (const SignTemplate* t : script) {
      const std::vector<SensorFrame> frames =
          stream_sign(*t, cfg, o.stream, Rng::derive(o.seed, sample_index++), t0);
      for (const SensorFrame& f : frames) wire << format_frame(f);
      t0 = frames.back().timestamp_ms + gap;
      frame_count += frames.size();
    }
  }

  if (!o.out.empty()) {
    write_file_atomic(o.out, wire.str());
    std::cout << "emitted " << frame_count << " frames for " << script.size() * o.repeat
              << " signs -> " << o.out << "\n";
  } else {
    serve_text(o.bind_host, o.serve_port, wire.str());
    std::cout << "served " << frame_count << " frames for " << script.size() * o.repeat
              << " signs\n";
  }
}

// --- listen ---------------------------------------------------------------------

// Bounded hand-off between the stream reader and the classification worker.
// When the worker falls behind, the oldest queued frame is dropped and counted.
class FrameQueue {
 public:
  explicit FrameQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(NormFrame f) {
    std::lock_guard<std::mutex> lock(mu_);
    if (q_.size() >= capacity_) {
      q_.pop_front();
      ++dropped_;
    }
    q_.push_back(std::move(f));
    cv_.notify_one();
  }

  std::optional<NormFrame> pop() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    NormFrame f = std::move(q_.front());
    q_.pop_front();
    return f;
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    cv_.notify_all();
  }

  std::size_t dropped() const {
    std::lock_guard<std::mutex> lock(mu_);
    return dropped_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<NormFrame> q_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

struct ListenOpts {
  std::string source;
  std::string model;
  double onset_threshold = 0.02;
  int onset_span = 5;
  double capture_ms = 1900.0;
  CleaningConfig cleaning;
  std::size_t queue_capacity = 1024;
};

void run_listen(const ListenOpts& o) {
  const std::unique_ptr<Model> model = load_model(o.model);
  if (model->dim() % kDefaultChannels != 0)
    throw ModelError("model dimension " + std::to_string(model->dim()) +
                     " is not a whole number of " + std::to_string(kDefaultChannels) +
                     "-channel instants");
  CaptureConfig cap;
  cap.window_instants = model->dim() / kDefaultChannels;
  cap.onset_threshold = o.onset_threshold;
  cap.onset_span = o.onset_span;
  cap.capture_ms = o.capture_ms;
  cap.validate();
  o.cleaning.validate();

  const std::unique_ptr<FrameSource> source = open_stream(o.source);

  FrameQueue queue(o.queue_capacity);
  std::exception_ptr reader_error;
  std::thread reader([&] {
    try {
      while (std::optional<SensorFrame> f = source->next()) queue.push(normalize_frame(*f));
    } catch (...) {
      reader_error = std::current_exception();
    }
    queue.close();
  });

  SignSegmenter segmenter(cap);
  std::size_t recognized = 0;
  std::size_t rejected = 0;
  const auto handle = [&](const std::vector<NormFrame>& run) {
    if (run.empty()) return;
    const long long t0 = std::llround(run.front().timestamp_ms);
    const long long t1 = std::llround(run.back().timestamp_ms);
    try {
      const GestureWindow raw = capture_window(run, cap);
      const RepairOutcome out = repair_sample(raw, o.cleaning);
      if (out.quality == Quality::quarantined) {
        ++rejected;
        std::cout << "[" << t0 << "-" << t1 << " ms] rejected: discontinuity too long to repair\n"
                  << std::flush;
        return;
      }
      ++recognized;
      std::cout << "[" << t0 << "-" << t1 << " ms] "
                << model->vocabulary().notation(model->predict(flatten_window(out.window)))
                << "\n"
                << std::flush;
    } catch (const DataError& e) {
      ++rejected;
      std::cout << "[" << t0 << "-" << t1 << " ms] rejected: " << e.what() << "\n" << std::flush;
    }
  };

  while (std::optional<NormFrame> f = queue.pop())
    if (std::optional<std::vector<NormFrame>> run = segmenter.push(*f)) handle(*run);
  if (std::optional<std::vector<NormFrame>> run = segmenter.flush()) handle(*run);
  reader.join();

  std::cout << "session: " << source->line_count() << " lines, " << source->malformed_count()
            << " malformed, " << recognized << " signs, " << rejected << " rejected, "
            << queue.dropped() << " dropped\n";
  if (queue.dropped() > 0)
    std::cerr << "warning: dropped " << queue.dropped()
              << " frames because the classifier fell behind\n";
  if (reader_error) std::rethrow_exception(reader_error);
}

// --- wiring ---------------------------------------------------------------------

constexpr const char* kFooter =
    "Configuration layers, lowest to highest precedence:\n"
    "  1. compiled-in defaults\n"
    "  2. --config INI file (key=value; one [section] per subcommand)\n"
    "  3. command-line flags\n"
    "\n"
    "Exit codes:\n"
    "  0 success, 1 usage error, 2 I/O error, 3 data validation error,\n"
    "  4 model or dimension mismatch.";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("flexsign - flex-sensor sign language recognition pipeline");
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; flags given on the command line override it");
  app.set_version_flag("--version", "flexsign 1.0.0");
  app.footer(kFooter);

  GenOpts gen;
  CLI::App* g = app.add_subcommand("gen", "Synthesize a labeled gesture dataset");
  g->add_option("-o,--out", gen.out, "Output dataset CSV")->required();
  g->add_option("--templates", gen.templates, "Sign template file (default: built-in set)");
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  CLI::Option* g_total =
      g->add_option("--total", gen.total, "Total sample count, spread evenly over the signs")
          ->check(CLI::PositiveNumber);
  g->add_option("--samples-per-class", gen.samples_per_class, "Samples per sign")
      ->capture_default_str()
      ->check(CLI::PositiveNumber)
      ->excludes(g_total);
  add_noise_flags(g, gen.noise);
  g->callback([&] { run_gen(gen); });

  CleanOpts clean;
  CLI::App* c = app.add_subcommand("clean", "Repair spikes and quarantine broken samples");
  c->add_option("-i,--in", clean.in, "Input dataset CSV")->required();
  c->add_option("-o,--out", clean.out, "Cleaned dataset CSV")->required();
  c->add_option("--report", clean.report, "Optional per-sample outcome CSV");
  c->add_option("--jump-threshold", clean.cfg.jump_threshold, "Spike detection threshold")
      ->capture_default_str();
  c->add_option("--max-spike-len", clean.cfg.max_spike_len,
                "Longest run still treated as a repairable spike")
      ->capture_default_str();
  c->callback([&] { run_clean(clean); });

  SplitOpts split;
  CLI::App* s = app.add_subcommand("split", "Shuffle-split a dataset into train and test files");
  s->add_option("-i,--in", split.in, "Input dataset CSV")->required();
  s->add_option("--train-out", split.train_out, "Training subset CSV")->required();
  s->add_option("--test-out", split.test_out, "Test subset CSV")->required();
  s->add_option("--ratio", split.ratio, "Training fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  s->callback([&] { run_split(split); });

  TrainOpts2 train;
  CLI::App* t = app.add_subcommand("train", "Train a classifier and save it");
  t->add_option("--model", train.model_name, "Classifier: rf|svm|knn5|knn3|logreg|dt")
      ->required()
      ->check(CLI::IsMember({"rf", "svm", "knn5", "knn3", "logreg", "dt"}));
  t->add_option("-i,--in", train.in, "Training dataset CSV")->required();
  t->add_option("-o,--out", train.out, "Output model file")->required();
  t->add_option("--seed", train.opt.seed, "Training seed")->capture_default_str();
  t->add_option("--rf-trees", train.opt.rf_trees, "Forest size")->capture_default_str();
  t->add_option("--rf-max-depth", train.opt.rf_max_depth, "Forest tree depth cap (0: unlimited)")
      ->capture_default_str();
  t->add_option("--dt-max-depth", train.opt.dt_max_depth, "Tree depth cap (0: unlimited)")
      ->capture_default_str();
  t->add_option("--lr-lambda", train.opt.lr_lambda, "Logistic regression L2 strength")
      ->capture_default_str();
  t->add_option("--lr-max-epochs", train.opt.lr_max_epochs, "Logistic regression epoch cap")
      ->capture_default_str();
  t->add_option("--svm-c", train.opt.svm_c, "SVM box constraint")->capture_default_str();
  t->add_option("--svm-gamma", train.opt.svm_gamma, "RBF gamma (0: 1/(dim*variance))")
      ->capture_default_str();
  t->callback([&] { run_train(train); });

  EvalOpts eval;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a model and write report artifacts");
  e->add_option("--model", eval.model, "Model file")->required();
  e->add_option("--data", eval.data, "Evaluation dataset CSV")->required();
  e->add_option("--report", eval.report, "Report text file")->required();
  e->add_option("--confusion-csv", eval.confusion_csv,
                "Confusion counts CSV (default: <report>.confusion.csv)");
  e->add_option("--confusion-svg", eval.confusion_svg,
                "Confusion heatmap SVG (default: <report>.confusion.svg)");
  e->callback([&] { run_eval(eval); });

  PredictOpts predict;
  CLI::App* p = app.add_subcommand("predict", "Print one notation per input window");
  p->add_option("--model", predict.model, "Model file")->required();
  p->add_option("--data", predict.data, "Dataset CSV; labels may be '?'")->required();
  p->callback([&] { run_predict(predict); });

  StreamSimOpts sim;
  CLI::App* ss = app.add_subcommand("stream-sim", "Emit wire-format frames for scripted signs");
  ss->add_option("--sign", sim.signs, "Sign notation to emit (repeatable; default: all signs)");
  ss->add_option("--repeat", sim.repeat, "Replays of the whole script")->capture_default_str();
  CLI::Option* ss_out = ss->add_option("-o,--out", sim.out, "Write frames to this file");
  ss->add_option("--serve", sim.serve_port, "Serve frames over TCP on this port (0: pick one)")
      ->excludes(ss_out);
  ss->add_option("--bind", sim.bind_host, "Bind address for --serve")->capture_default_str();
  ss->add_option("--templates", sim.templates, "Sign template file (default: built-in set)");
  ss->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  ss->add_option("--frame-rate", sim.stream.frame_rate_hz, "Frames per second")
      ->capture_default_str();
  ss->add_option("--standby-ms", sim.stream.standby_ms, "Rest time before each sign")
      ->capture_default_str();
  ss->add_option("--capture-ms", sim.stream.capture_ms, "Duration of each sign")
      ->capture_default_str();
  add_noise_flags(ss, sim.noise);
  ss->callback([&] { run_stream_sim(sim); });

  ListenOpts listen;
  CLI::App* l = app.add_subcommand("listen", "Recognize signs from a live frame stream");
  l->add_option("--source", listen.source, "file:<path> or tcp:<host>:<port>")->required();
  l->add_option("--model", listen.model, "Model file")->required();
  l->add_option("--onset-threshold", listen.onset_threshold, "Movement threshold to leave standby")
      ->capture_default_str();
  l->add_option("--onset-span", listen.onset_span, "Frames compared for onset detection")
      ->capture_default_str();
  l->add_option("--capture-ms", listen.capture_ms, "Capture duration per sign")
      ->capture_default_str();
  l->add_option("--jump-threshold", listen.cleaning.jump_threshold, "Spike detection threshold")
      ->capture_default_str();
  l->add_option("--max-spike-len", listen.cleaning.max_spike_len,
                "Longest run still treated as a repairable spike")
      ->capture_default_str();
  l->add_option("--queue-capacity", listen.queue_capacity, "Reader-to-worker hand-off bound")
      ->capture_default_str();
  l->callback([&] { run_listen(listen); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 1;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << "\n";
    return 2;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return 3;
  } catch (const ModelError& err) {
    std::cerr << "model error: " << err.what() << "\n";
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
