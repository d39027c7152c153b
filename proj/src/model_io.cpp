#include <fstream>
#include <limits>
#include <sstream>

#include "flexsign/errors.hpp"
#include "flexsign/learn.hpp"

namespace flexsign {

namespace {

// Whitespace-token reader with typed errors; a short file always surfaces as
// a ModelError instead of a partially-initialized model.
class TokenReader {
 public:
  TokenReader(std::istream& in, const std::string& name) : in_(in), name_(name) {}

  std::string next(const char* what) {
    std::string tok;
    if (!(in_ >> tok)) {
      throw ModelError(name_ + ": unexpected end of model file while reading " + what);
    }
    return tok;
  }

  void expect(const char* literal) {
    const std::string tok = next(literal);
    if (tok != literal) {
      throw ModelError(name_ + ": expected '" + literal + "', got '" + tok + "'");
    }
  }

  long long next_int(const char* what, long long lo, long long hi) {
    const std::string tok = next(what);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw ModelError(name_ + ": '" + tok + "' is not a valid " + what);
    }
    if (used != tok.size()) throw ModelError(name_ + ": '" + tok + "' is not a valid " + what);
    if (v < lo || v > hi) {
      throw ModelError(name_ + ": " + what + " " + tok + " out of range");
    }
    return v;
  }

  double next_real(const char* what) {
    const std::string tok = next(what);
    try {
      return parse_real(tok, name_ + " " + what);
    } catch (const DataError& e) {
      throw ModelError(e.what());
    }
  }

 private:
  std::istream& in_;
  std::string name_;
};

void load_tree_nodes(TokenReader& r, std::vector<TreeNode>& nodes, int dim, int classes) {
  r.expect("nodes");
  const long long count = r.next_int("node count", 1, 100000000);
  nodes.clear();
  nodes.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const std::string tag = r.next("node tag");
    TreeNode node;
    if (tag == "leaf") {
      node.label = static_cast<int>(r.next_int("leaf label", 0, classes - 1));
    } else if (tag == "split") {
      node.feature = static_cast<int>(r.next_int("split feature", 0, dim - 1));
      node.threshold = r.next_real("split threshold");
      node.left = static_cast<int>(r.next_int("left child", 0, count - 1));
      node.right = static_cast<int>(r.next_int("right child", 0, count - 1));
    } else {
      throw ModelError("unexpected node tag '" + tag + "'");
    }
    nodes.push_back(node);
  }
}

}  // namespace

void save_model(const Model& m, const std::string& path) {
  std::ostringstream out;
  out << "# flexsign-model v1\n";
  out << "kind " << classifier_name(m.kind()) << "\n";
  out << "vocabulary";
  for (int k = 0; k < m.vocabulary().size(); ++k) {
    out << (k == 0 ? " " : ",") << m.vocabulary().notation(k);
  }
  out << "\n";
  out << "dim " << m.dim() << "\n";
  m.save_payload(out);
  write_file_atomic(path, out.str());
}

std::unique_ptr<Model> load_model_stream(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ModelError(name + ": empty model file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "# flexsign-model v1") {
    throw ModelError(name + ": unsupported model file version (expected '# flexsign-model v1')");
  }

  TokenReader r(in, name);
  r.expect("kind");
  const std::string kind_name = r.next("classifier kind");
  const ClassifierKind kind = [&] {
    try {
      return classifier_from_name(kind_name);
    } catch (const DataError& e) {
      throw ModelError(e.what());
    }
  }();

  r.expect("vocabulary");
  const std::string vocab_csv = r.next("vocabulary");
  std::vector<std::string> signs;
  std::stringstream split(vocab_csv);
  std::string sign;
  while (std::getline(split, sign, ',')) signs.push_back(sign);
  Vocabulary vocab(std::move(signs));

  r.expect("dim");
  const int dim = static_cast<int>(r.next_int("dimension", 1, 1000000));
  const int classes = vocab.size();

  switch (kind) {
    case ClassifierKind::decision_tree: {
      auto m = std::make_unique<DecisionTreeModel>(vocab);
      m->set_dim(dim);
      load_tree_nodes(r, m->mutable_nodes(), dim, classes);
      return m;
    }
    case ClassifierKind::random_forest: {
      auto m = std::make_unique<RandomForestModel>(vocab);
      m->set_dim(dim);
      r.expect("trees");
      const long long trees = r.next_int("tree count", 1, 1000000);
      for (long long t = 0; t < trees; ++t) {
        DecisionTreeModel tree(vocab);
        tree.set_dim(dim);
        load_tree_nodes(r, tree.mutable_nodes(), dim, classes);
        m->mutable_trees().push_back(std::move(tree));
      }
      return m;
    }
    case ClassifierKind::knn5:
    case ClassifierKind::knn3: {
      r.expect("k");
      const int k = static_cast<int>(r.next_int("neighbor count", 1, 1000000));
      auto m = std::make_unique<KnnModel>(vocab, k);
      if (classifier_name(m->kind()) != kind_name) {
        throw ModelError(name + ": neighbor count does not match model kind " + kind_name);
      }
      m->set_dim(dim);
      r.expect("rows");
      const long long rows = r.next_int("row count", 1, 100000000);
      TrainMatrix& train = m->mutable_train();
      train.dim = dim;
      train.classes = classes;
      train.x.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim));
      for (long long i = 0; i < rows; ++i) {
        train.y.push_back(static_cast<int>(r.next_int("row label", 0, classes - 1)));
        for (int f = 0; f < dim; ++f) train.x.push_back(r.next_real("row value"));
      }
      return m;
    }
    case ClassifierKind::logistic_regression: {
      auto m = std::make_unique<LogRegModel>(vocab);
      r.expect("classes");
      const int k = static_cast<int>(r.next_int("class count", 2, 1000000));
      if (k != classes) throw ModelError(name + ": class count does not match the vocabulary");
      r.expect("cols");
      const int cols = static_cast<int>(r.next_int("column count", 2, 1000001));
      if (cols != dim + 1) throw ModelError(name + ": column count does not match dim + 1");
      m->set_shape(dim, k);
      r.expect("converged");
      const bool converged = r.next_int("converged flag", 0, 1) == 1;
      std::vector<double>& w = m->mutable_weights();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = r.next_real("weight");
      m->set_converged(converged);
      return m;
    }
    case ClassifierKind::svm_rbf: {
      auto m = std::make_unique<SvmModel>(vocab);
      m->set_dim(dim);
      r.expect("gamma");
      m->set_gamma(r.next_real("kernel width"));
      r.expect("converged");
      m->set_converged(r.next_int("converged flag", 0, 1) == 1);
      r.expect("machines");
      const long long machines = r.next_int("machine count", 0, 1000000);
      for (long long i = 0; i < machines; ++i) {
        r.expect("pair");
        SvmModel::Machine machine;
        machine.label_a = static_cast<int>(r.next_int("pair label", 0, classes - 1));
        machine.label_b = static_cast<int>(r.next_int("pair label", 0, classes - 1));
        r.expect("svs");
        const long long svs = r.next_int("support vector count", 0, 100000000);
        r.expect("bias");
        machine.bias = r.next_real("bias");
        for (long long s = 0; s < svs; ++s) {
          machine.coef.push_back(r.next_real("coefficient"));
          std::vector<double> x(static_cast<std::size_t>(dim));
          for (int f = 0; f < dim; ++f) x[static_cast<std::size_t>(f)] = r.next_real("support value");
          machine.support.push_back(std::move(x));
        }
        m->mutable_machines().push_back(std::move(machine));
      }
      return m;
    }
  }
  throw ModelError(name + ": unhandled model kind");
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  return load_model_stream(in, path);
}

}  // namespace flexsign
