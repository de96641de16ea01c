#include "intent/classifier.hpp"

#include <json.hpp>

#include <charconv>
#include <stdexcept>

namespace intent {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "intent-classifier";
constexpr int kVersion = 1;

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd json_mat(const json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows()) throw std::invalid_argument("matrix rows");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::VectorXd r = json_vec(data.at(static_cast<std::size_t>(i)));
    if (r.size() != m.cols()) throw std::invalid_argument("matrix cols");
    m.row(i) = r.transpose();
  }
  return m;
}

json params_json(const HyperParams& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SvmParams>) {
          return {{"kernel", std::string(to_string(v.kernel))}, {"C", v.c}, {"gamma", v.gamma}};
        } else if constexpr (std::is_same_v<T, NbParams>) {
          return {{"var_smoothing", v.var_smoothing}};
        } else {
          return {{"n_trees", v.n_trees}, {"max_depth", v.max_depth}, {"min_leaf", v.min_leaf}};
        }
      },
      p);
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::NaiveBayes: return "nb";
    case ClassifierKind::RandomForest: return "rf";
  }
  return "svm";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view name) {
  if (name == "svm") return ClassifierKind::Svm;
  if (name == "nb") return ClassifierKind::NaiveBayes;
  if (name == "rf") return ClassifierKind::RandomForest;
  return std::nullopt;
}

ClassifierKind kind_of(const HyperParams& params) {
  return static_cast<ClassifierKind>(params.index());
}

std::map<std::string, std::string> hyperparameter_map(const HyperParams& params) {
  std::map<std::string, std::string> out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SvmParams>) {
          out["kernel"] = std::string(to_string(v.kernel));
          out["C"] = shortest(v.c);
          if (v.kernel == Kernel::Rbf) out["gamma"] = shortest(v.gamma);
        } else if constexpr (std::is_same_v<T, NbParams>) {
          out["var_smoothing"] = shortest(v.var_smoothing);
        } else {
          out["n_trees"] = std::to_string(v.n_trees);
          out["max_depth"] = std::to_string(v.max_depth);
          out["min_leaf"] = std::to_string(v.min_leaf);
        }
      },
      params);
  return out;
}

Classifier Classifier::train(const Eigen::MatrixXd& x, std::span<const int> labels,
                             const HyperParams& params, std::uint64_t seed,
                             std::vector<std::string>* warnings) {
  return std::visit(
      [&](const auto& p) -> Classifier {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SvmParams>) {
          return Classifier(train_svm(x, labels, p, warnings));
        } else if constexpr (std::is_same_v<T, NbParams>) {
          return Classifier(train_nb(x, labels, p));
        } else {
          return Classifier(train_rf(x, labels, p, seed));
        }
      },
      params);
}

ClassifierKind Classifier::kind() const { return static_cast<ClassifierKind>(model_.index()); }

HyperParams Classifier::hyperparameters() const {
  return std::visit([](const auto& m) -> HyperParams { return m.params; }, model_);
}

int Classifier::n_features() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          return static_cast<int>(m.support_vectors.cols());
        } else if constexpr (std::is_same_v<T, NbModel>) {
          return static_cast<int>(m.mean.cols());
        } else {
          return m.n_features;
        }
      },
      model_);
}

Eigen::VectorXd Classifier::decision_score(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_features()) throw std::invalid_argument("classifier: feature dimension mismatch");
  return std::visit(
      [&](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          return svm_decision(m, x);
        } else if constexpr (std::is_same_v<T, NbModel>) {
          return nb_decision(m, x);
        } else {
          return rf_decision(m, x);
        }
      },
      model_);
}

std::vector<int> Classifier::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd s = decision_score(x);
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) > 0.0 ? 1 : 0;
  return out;
}

std::string Classifier::to_json() const {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["kind"] = std::string(to_string(kind()));
  doc["hyperparameters"] = params_json(hyperparameters());
  json params;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          params["support_vectors"] = mat_json(m.support_vectors);
          params["dual_coef"] = vec_json(m.dual_coef);
          params["bias"] = m.bias;
          params["n_features"] = m.support_vectors.cols();
        } else if constexpr (std::is_same_v<T, NbModel>) {
          params["log_prior"] = vec_json(m.log_prior);
          params["mean"] = mat_json(m.mean);
          params["variance"] = mat_json(m.variance);
        } else {
          params["n_features"] = m.n_features;
          json trees = json::array();
          for (const auto& t : m.trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes) {
              nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction});
            }
            trees.push_back(nodes);
          }
          params["trees"] = trees;
        }
      },
      model_);
  doc["parameters"] = params;
  return doc.dump();
}

Classifier Classifier::from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) throw std::invalid_argument("unknown format");
    if (doc.at("version").get<int>() != kVersion) throw std::invalid_argument("unsupported version");
    const auto kind = parse_classifier_kind(doc.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown classifier kind");
    const json& hp = doc.at("hyperparameters");
    const json& p = doc.at("parameters");
    switch (*kind) {
      case ClassifierKind::Svm: {
        SvmModel m;
        const auto k = parse_kernel(hp.at("kernel").get<std::string>());
        if (!k) throw std::invalid_argument("unknown kernel");
        m.params = {*k, hp.at("C").get<double>(), hp.at("gamma").get<double>()};
        m.support_vectors = json_mat(p.at("support_vectors"));
        if (m.support_vectors.rows() == 0) {
          m.support_vectors.resize(0, p.at("n_features").get<Eigen::Index>());
        }
        m.dual_coef = json_vec(p.at("dual_coef"));
        m.bias = p.at("bias").get<double>();
        if (m.dual_coef.size() != m.support_vectors.rows()) throw std::invalid_argument("dual_coef size");
        return Classifier(std::move(m));
      }
      case ClassifierKind::NaiveBayes: {
        NbModel m;
        m.params.var_smoothing = hp.at("var_smoothing").get<double>();
        const Eigen::VectorXd lp = json_vec(p.at("log_prior"));
        if (lp.size() != 2) throw std::invalid_argument("log_prior size");
        m.log_prior = lp;
        m.mean = json_mat(p.at("mean"));
        m.variance = json_mat(p.at("variance"));
        if (m.mean.rows() != 2 || m.variance.rows() != 2 || m.mean.cols() != m.variance.cols()) {
          throw std::invalid_argument("naive Bayes parameter shape");
        }
        return Classifier(std::move(m));
      }
      case ClassifierKind::RandomForest: {
        RfModel m;
        m.params = {hp.at("n_trees").get<int>(), hp.at("max_depth").get<int>(),
                    hp.at("min_leaf").get<int>()};
        m.n_features = p.at("n_features").get<int>();
        for (const auto& t : p.at("trees")) {
          DecisionTree tree;
          for (const auto& n : t) {
            TreeNode node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                          n.at(3).get<int>(), n.at(4).get<double>()};
            const auto limit = static_cast<int>(t.size());
            if (node.feature >= m.n_features || (node.feature >= 0 &&
                (node.left <= 0 || node.left >= limit || node.right <= 0 || node.right >= limit))) {
              throw std::invalid_argument("tree node out of range");
            }
            tree.nodes.push_back(node);
          }
          if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
          m.trees.push_back(std::move(tree));
        }
        return Classifier(std::move(m));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("classifier JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("classifier JSON: ") + e.what());
  }
  throw std::invalid_argument("classifier JSON: unreachable");
}

}  // namespace intent
