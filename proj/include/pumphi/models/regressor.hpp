#pragma once

// One fit/predict surface over the learned regressors, plus the model file format.
//
// Model files are line-oriented text. Every floating-point value is written as a
// C hexadecimal float so a reload reproduces the fitted state bit for bit:
//
//   pumphi-model 1
//   kind <dt|rf|knn|svr|mlp>
//   seed <u64>
//   features <n>            followed by n lines, one feature name each
//   standardizer <0|1>      if 1: "mean <n hex>" and "std <n hex>" lines
//   <kind payload>
//
// Payloads:
//   dt   tree <nodes>  then one line per node:
//        feature threshold left right value split_sse sse n_samples
//   rf   forest <trees>  then one dt "tree" block per tree
//   knn  knn <k> <rows> <cols>  then one line per training row: <cols hex> <target hex>
//   svr  svr <m>  then "w <m hex>" and "b <hex>"
//   mlp  mlp <inputs> <hidden> <y_mean hex> <y_scale hex>  then "params <count> <hex...>"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/models/forest.hpp"
#include "pumphi/models/knn.hpp"
#include "pumphi/models/mlp.hpp"
#include "pumphi/models/svr.hpp"
#include "pumphi/models/tree.hpp"

namespace pumphi {

enum class ModelKind { dt, rf, knn, svr, mlp };

inline constexpr ModelKind kAllModels[] = {ModelKind::dt, ModelKind::rf, ModelKind::knn,
                                           ModelKind::svr, ModelKind::mlp};

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::dt: return "dt";
    case ModelKind::rf: return "rf";
    case ModelKind::knn: return "knn";
    case ModelKind::svr: return "svr";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  for (ModelKind k : kAllModels) {
    if (s == model_name(k)) return k;
  }
  fail(Errc::config, "unknown model kind '" + s + "'");
}

// Trees consume raw features; distance and gradient models get z-scored inputs.
inline bool uses_standardization(ModelKind k) {
  return k == ModelKind::knn || k == ModelKind::svr || k == ModelKind::mlp;
}

struct ModelHyperparams {
  TreeParams dt{8, 5};
  ForestParams rf{};
  std::size_t knn_k = 5;
  SvrParams svr{};
  MlpParams mlp{};
};

using ModelState = std::variant<RegressionTree, RandomForest, KnnRegressor, LinearSvr, Mlp>;

struct FittedModel {
  ModelKind kind = ModelKind::dt;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::optional<Standardizer> standardizer;
  ModelState state;

  double predict(std::span<const double> x) const {
    if (standardizer) {
      const auto z = standardizer->apply(x);
      return std::visit([&](const auto& m) { return m.predict(z); }, state);
    }
    return std::visit([&](const auto& m) { return m.predict(x); }, state);
  }

  std::vector<double> predict(const Matrix& X) const {
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
    return out;
  }

  bool operator==(const FittedModel&) const = default;
};

inline FittedModel fit_model(ModelKind kind, const ModelHyperparams& hp, const SupervisedSet& train,
                             std::uint64_t seed, unsigned threads = 1) {
  require(train.size() > 0, Errc::empty_training, "no training rows");
  FittedModel model;
  model.kind = kind;
  model.seed = seed;
  model.feature_names = train.names;
  Matrix X = train.X;
  if (uses_standardization(kind)) {
    model.standardizer = Standardizer::fit(train.X);
    X = model.standardizer->apply(train.X);
  }
  switch (kind) {
    case ModelKind::dt:
      model.state = RegressionTree::fit(X, train.y, hp.dt);
      break;
    case ModelKind::rf: {
      ForestParams p = hp.rf;
      p.seed = seed;
      model.state = RandomForest::fit(X, train.y, p, threads);
      break;
    }
    case ModelKind::knn:
      model.state = KnnRegressor::fit(std::move(X), train.y, hp.knn_k);
      break;
    case ModelKind::svr: {
      SvrParams p = hp.svr;
      p.seed = seed;
      model.state = LinearSvr::fit(X, train.y, p);
      break;
    }
    case ModelKind::mlp: {
      MlpParams p = hp.mlp;
      p.seed = seed;
      model.state = Mlp::fit(X, train.y, p);
      break;
    }
  }
  return model;
}

namespace detail {

inline std::string hex(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

inline double parse_hex(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(Errc::model, "bad hex float '" + s + "' in model file");
  }
  return v;
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::istringstream line() {
    std::string l;
    if (!std::getline(in_, l)) fail(Errc::model, "truncated model file");
    return std::istringstream(l);
  }

  std::string raw_line() {
    std::string l;
    if (!std::getline(in_, l)) fail(Errc::model, "truncated model file");
    return l;
  }

  static void expect(std::istringstream& ls, const std::string& token) {
    std::string t;
    ls >> t;
    if (t != token) fail(Errc::model, "model file: expected '" + token + "', found '" + t + "'");
  }

  template <typename T>
  static T value(std::istringstream& ls) {
    T v{};
    if (!(ls >> v)) fail(Errc::model, "model file: malformed field");
    return v;
  }

  static double hexval(std::istringstream& ls) { return parse_hex(value<std::string>(ls)); }

 private:
  std::istream& in_;
};

inline void write_tree(std::ostream& out, const RegressionTree& tree) {
  out << "tree " << tree.nodes().size() << '\n';
  for (const auto& n : tree.nodes()) {
    out << n.feature << ' ' << hex(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
        << hex(n.value) << ' ' << hex(n.split_sse) << ' ' << hex(n.sse) << ' ' << n.n_samples << '\n';
  }
}

inline RegressionTree read_tree(ModelReader& r) {
  auto header = r.line();
  ModelReader::expect(header, "tree");
  const auto count = ModelReader::value<std::size_t>(header);
  std::vector<TreeNode> nodes(count);
  for (auto& n : nodes) {
    auto ls = r.line();
    n.feature = ModelReader::value<int>(ls);
    n.threshold = ModelReader::hexval(ls);
    n.left = ModelReader::value<int>(ls);
    n.right = ModelReader::value<int>(ls);
    n.value = ModelReader::hexval(ls);
    n.split_sse = ModelReader::hexval(ls);
    n.sse = ModelReader::hexval(ls);
    n.n_samples = ModelReader::value<std::size_t>(ls);
  }
  require(!nodes.empty(), Errc::model, "model file: empty tree");
  return RegressionTree(std::move(nodes));
}

inline void write_vector(std::ostream& out, const char* tag, std::span<const double> v) {
  out << tag;
  for (double x : v) out << ' ' << hex(x);
  out << '\n';
}

inline std::vector<double> read_vector(ModelReader& r, const char* tag, std::size_t n) {
  auto ls = r.line();
  ModelReader::expect(ls, tag);
  std::vector<double> v(n);
  for (auto& x : v) x = ModelReader::hexval(ls);
  return v;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline void write_model(std::ostream& out, const FittedModel& model) {
  using detail::hex;
  out << "pumphi-model " << kModelFormatVersion << '\n';
  out << "kind " << model_name(model.kind) << '\n';
  out << "seed " << model.seed << '\n';
  out << "features " << model.feature_names.size() << '\n';
  for (const auto& n : model.feature_names) out << n << '\n';
  out << "standardizer " << (model.standardizer ? 1 : 0) << '\n';
  if (model.standardizer) {
    detail::write_vector(out, "mean", model.standardizer->mean);
    detail::write_vector(out, "std", model.standardizer->std);
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RegressionTree>) {
          detail::write_tree(out, m);
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          out << "forest " << m.trees().size() << '\n';
          for (const auto& t : m.trees()) detail::write_tree(out, t);
        } else if constexpr (std::is_same_v<T, KnnRegressor>) {
          out << "knn " << m.k() << ' ' << m.train_x().rows << ' ' << m.train_x().cols << '\n';
          for (std::size_t i = 0; i < m.train_x().rows; ++i) {
            bool first = true;
            for (double v : m.train_x().row(i)) {
              out << (first ? "" : " ") << hex(v);
              first = false;
            }
            out << (first ? "" : " ") << hex(m.train_y()[i]) << '\n';
          }
        } else if constexpr (std::is_same_v<T, LinearSvr>) {
          out << "svr " << m.weights().size() << '\n';
          detail::write_vector(out, "w", m.weights());
          out << "b " << hex(m.bias()) << '\n';
        } else if constexpr (std::is_same_v<T, Mlp>) {
          out << "mlp " << m.inputs() << ' ' << m.hidden() << ' ' << hex(m.y_mean()) << ' '
              << hex(m.y_scale()) << '\n';
          out << "params " << m.params().size();
          for (double v : m.params()) out << ' ' << hex(v);
          out << '\n';
        }
      },
      model.state);
}

inline FittedModel read_model(std::istream& in) {
  detail::ModelReader r(in);
  using R = detail::ModelReader;
  FittedModel model;
  {
    auto ls = r.line();
    R::expect(ls, "pumphi-model");
    const int version = R::value<int>(ls);
    require(version == kModelFormatVersion, Errc::model,
            "unsupported model format version " + std::to_string(version));
  }
  {
    auto ls = r.line();
    R::expect(ls, "kind");
    const auto name = R::value<std::string>(ls);
    const auto it = std::find_if(std::begin(kAllModels), std::end(kAllModels),
                                 [&](ModelKind k) { return name == model_name(k); });
    require(it != std::end(kAllModels), Errc::model, "model file: unknown kind '" + name + "'");
    model.kind = *it;
  }
  {
    auto ls = r.line();
    R::expect(ls, "seed");
    model.seed = R::value<std::uint64_t>(ls);
  }
  std::size_t n_features = 0;
  {
    auto ls = r.line();
    R::expect(ls, "features");
    n_features = R::value<std::size_t>(ls);
  }
  for (std::size_t i = 0; i < n_features; ++i) model.feature_names.push_back(r.raw_line());
  {
    auto ls = r.line();
    R::expect(ls, "standardizer");
    if (R::value<int>(ls) == 1) {
      Standardizer s;
      s.mean = detail::read_vector(r, "mean", n_features);
      s.std = detail::read_vector(r, "std", n_features);
      model.standardizer = std::move(s);
    }
  }
  switch (model.kind) {
    case ModelKind::dt:
      model.state = detail::read_tree(r);
      break;
    case ModelKind::rf: {
      auto ls = r.line();
      R::expect(ls, "forest");
      const auto n = R::value<std::size_t>(ls);
      std::vector<RegressionTree> trees;
      for (std::size_t i = 0; i < n; ++i) trees.push_back(detail::read_tree(r));
      model.state = RandomForest(std::move(trees));
      break;
    }
    case ModelKind::knn: {
      auto ls = r.line();
      R::expect(ls, "knn");
      const auto k = R::value<std::size_t>(ls);
      const auto rows = R::value<std::size_t>(ls);
      const auto cols = R::value<std::size_t>(ls);
      Matrix X(rows, cols);
      std::vector<double> y(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        auto row = r.line();
        for (std::size_t j = 0; j < cols; ++j) X(i, j) = R::hexval(row);
        y[i] = R::hexval(row);
      }
      model.state = KnnRegressor::fit(std::move(X), std::move(y), k);
      break;
    }
    case ModelKind::svr: {
      auto ls = r.line();
      R::expect(ls, "svr");
      const auto m = R::value<std::size_t>(ls);
      auto w = detail::read_vector(r, "w", m);
      auto bl = r.line();
      R::expect(bl, "b");
      model.state = LinearSvr(std::move(w), R::hexval(bl));
      break;
    }
    case ModelKind::mlp: {
      auto ls = r.line();
      R::expect(ls, "mlp");
      const auto inputs = R::value<std::size_t>(ls);
      const auto hidden = R::value<std::size_t>(ls);
      const double y_mean = R::hexval(ls);
      const double y_scale = R::hexval(ls);
      auto pl = r.line();
      R::expect(pl, "params");
      const auto count = R::value<std::size_t>(pl);
      require(count == Mlp::param_count(inputs, hidden), Errc::model, "model file: bad mlp size");
      std::vector<double> p(count);
      for (auto& v : p) v = R::hexval(pl);
      model.state = Mlp(inputs, hidden, std::move(p), y_mean, y_scale);
      break;
    }
  }
  return model;
}

inline void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::data, "cannot write model file " + path);
  write_model(out, model);
  require(static_cast<bool>(out), Errc::data, "failed writing model file " + path);
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::data, "cannot open model file " + path);
  return read_model(in);
}

}  // namespace pumphi
