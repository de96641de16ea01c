#include "intent/config.hpp"

#include "intent/grid_search.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace intent {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Accepted keys, in echo order.
const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"", {"dataset", "output_dir", "ivt", "filter", "epoching", "eeg_features", "gaze_features",
            "model", "fusion", "eval"}},
      {"ivt", {"max_gap_s", "median_window", "velocity_window_s", "threshold_deg_s",
               "merge_max_gap_s", "merge_max_angle_deg", "min_fixation_s"}},
      {"filter", {"highpass_hz", "lowpass_hz", "notch_center_hz", "notch_halfwidth_hz", "order",
                  "bad_channel_z", "montage_file"}},
      {"epoching", {"min_duration_s", "edge_guard_s"}},
      {"eeg_features", {"method", "bands", "higuchi_kmax", "dfa_boxes", "variance_target",
                        "csp_components"}},
      {"eeg_features.bands[]", {"name", "lo_hz", "hi_hz", "closed_hi"}},
      {"gaze_features", {"clustering_threshold", "pinned_selection"}},
      {"model", {"classifier", "meta_classifier", "cv_folds", "stacking_folds", "svm", "rf", "nb"}},
      {"model.svm", {"kernels", "c", "gamma"}},
      {"model.rf", {"n_trees", "max_depth", "min_leaf"}},
      {"model.nb", {"var_smoothing"}},
      {"fusion", {"strategy", "compare"}},
      {"eval", {"protocol", "repeats", "test_fraction", "windows", "window_protocol", "seed",
                "inject_leakage"}},
  };
  return s;
}

const std::vector<std::string>& allowed(const std::string& section) {
  for (const auto& [name, keys] : schema()) {
    if (name == section) return keys;
  }
  throw std::logic_error("config schema: no section " + section);
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

class Section {
 public:
  Section(const json& j, std::string path, std::string schema_name)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected a mapping");
    const auto& keys = allowed(schema_name);
    for (const auto& [k, v] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ConfigError("unknown configuration key '" + join(path_, k) + "'");
      }
    }
  }

  const json* find(const std::string& key) const {
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  std::string key(const std::string& k) const { return join(path_, k); }

  void number(const std::string& k, double& out) const {
    if (const json* v = find(k)) out = as_number(*v, key(k));
  }
  void integer(const std::string& k, int& out) const {
    if (const json* v = find(k)) out = as_int(*v, key(k));
  }
  void boolean(const std::string& k, bool& out) const {
    if (const json* v = find(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& k, std::string& out) const {
    if (const json* v = find(k)) out = as_string(*v, key(k));
  }
  void path(const std::string& k, std::filesystem::path& out) const {
    if (const json* v = find(k)) out = as_string(*v, key(k));
  }
  template <typename T, typename F>
  void list(const std::string& k, std::vector<T>& out, F convert) const {
    if (const json* v = find(k)) {
      if (!v->is_array()) throw ConfigError(key(k) + ": expected a list");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(convert((*v)[i], key(k) + "[" + std::to_string(i) + "]"));
      }
    }
  }
  template <typename E, typename P>
  void choice(const std::string& k, E& out, P parse, std::string_view options) const {
    if (const json* v = find(k)) out = as_choice<E>(*v, key(k), parse, options);
  }
  std::optional<Section> child(const std::string& k, const std::string& schema_name) const {
    if (const json* v = find(k)) return Section(*v, key(k), schema_name);
    return std::nullopt;
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
    return d;
  }
  static int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    const auto i = v.get<long long>();
    if (i < INT32_MIN || i > INT32_MAX) throw ConfigError(where + ": out of range");
    return static_cast<int>(i);
  }
  static std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
  }
  template <typename E, typename P>
  static E as_choice(const json& v, const std::string& where, P parse, std::string_view options) {
    const auto s = as_string(v, where);
    const auto e = parse(s);
    if (!e) throw ConfigError(where + ": '" + s + "' is not one of " + std::string(options));
    return *e;
  }

 private:
  std::string label() const { return path_.empty() ? "configuration" : path_; }
  const json& j_;
  std::string path_;
};

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        const auto k = kv.first.as<std::string>();
        if (obj.contains(k)) throw ConfigError("duplicate configuration key '" + k + "'");
        obj[k] = yaml_to_json(kv.second);
      }
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      if (s == "null" || s == "~") return nullptr;
      const char* b = s.data();
      const char* e = s.data() + s.size();
      if (!s.empty() && s[0] != '+') {
        long long i = 0;
        if (const auto r = std::from_chars(b, e, i); r.ec == std::errc() && r.ptr == e) return i;
        unsigned long long u = 0;
        if (const auto r = std::from_chars(b, e, u); r.ec == std::errc() && r.ptr == e) return u;
        double d = 0.0;
        if (const auto r = std::from_chars(b, e, d); r.ec == std::errc() && r.ptr == e) return d;
      }
      return s;
    }
  }
  return nullptr;
}

PipelineConfig from_json(const json& root) {
  PipelineConfig c;
  const Section top(root, "", "");
  top.path("dataset", c.dataset);
  top.path("output_dir", c.output_dir);

  if (auto s = top.child("ivt", "ivt")) {
    s->number("max_gap_s", c.ivt.max_gap_s);
    s->integer("median_window", c.ivt.median_window);
    s->number("velocity_window_s", c.ivt.velocity_window_s);
    s->number("threshold_deg_s", c.ivt.threshold_deg_s);
    s->number("merge_max_gap_s", c.ivt.merge_max_gap_s);
    s->number("merge_max_angle_deg", c.ivt.merge_max_angle_deg);
    s->number("min_fixation_s", c.ivt.min_fixation_s);
  }
  if (auto s = top.child("filter", "filter")) {
    auto& f = c.eeg_preproc.filter;
    s->number("highpass_hz", f.highpass_hz);
    s->number("lowpass_hz", f.lowpass_hz);
    s->number("notch_center_hz", f.notch_center_hz);
    s->number("notch_halfwidth_hz", f.notch_halfwidth_hz);
    s->integer("order", f.order);
    s->number("bad_channel_z", c.eeg_preproc.bad_channel_z);
    s->path("montage_file", c.eeg_preproc.montage_file);
  }
  if (auto s = top.child("epoching", "epoching")) {
    s->number("min_duration_s", c.epoching.min_duration_s);
    s->number("edge_guard_s", c.epoching.edge_guard_s);
  }
  if (auto s = top.child("eeg_features", "eeg_features")) {
    auto& e = c.eeg_features;
    s->choice("method", c.eeg_method, parse_eeg_method, "pyeeg, csp");
    s->list("bands", e.bands, [](const json& v, const std::string& where) {
      const Section b(v, where, "eeg_features.bands[]");
      Band band;
      b.string("name", band.name);
      b.number("lo_hz", band.lo_hz);
      b.number("hi_hz", band.hi_hz);
      b.boolean("closed_hi", band.closed_hi);
      if (band.name.empty()) throw ConfigError(where + ".name: required");
      return band;
    });
    s->integer("higuchi_kmax", e.higuchi_kmax);
    s->list("dfa_boxes", e.dfa_boxes, Section::as_int);
    s->number("variance_target", e.variance_target);
    s->integer("csp_components", e.csp_components);
  }
  if (auto s = top.child("gaze_features", "gaze_features")) {
    s->number("clustering_threshold", c.gaze_features.clustering_threshold);
    if (s->find("pinned_selection")) {
      std::vector<std::string> names;
      s->list("pinned_selection", names, Section::as_string);
      c.gaze_features.pinned_selection = names;
    }
  }
  if (auto s = top.child("model", "model")) {
    auto& m = c.model;
    s->choice("classifier", m.classifier, parse_classifier_kind, "svm, nb, rf");
    s->choice("meta_classifier", m.meta_classifier, parse_classifier_kind, "svm, nb, rf");
    s->integer("cv_folds", m.cv_folds);
    s->integer("stacking_folds", m.stacking_folds);
    if (auto v = s->child("svm", "model.svm")) {
      v->list("kernels", m.svm_kernels, [](const json& j, const std::string& where) {
        return Section::as_choice<Kernel>(j, where, parse_kernel, "linear, rbf");
      });
      v->list("c", m.svm_c, Section::as_number);
      v->list("gamma", m.svm_gamma, Section::as_number);
    }
    if (auto v = s->child("rf", "model.rf")) {
      v->list("n_trees", m.rf_n_trees, Section::as_int);
      v->list("max_depth", m.rf_max_depth, Section::as_int);
      v->list("min_leaf", m.rf_min_leaf, Section::as_int);
    }
    if (auto v = s->child("nb", "model.nb")) v->number("var_smoothing", m.nb_var_smoothing);
  }
  const auto strategies = "early, late, hybrid, none-eeg, none-gaze";
  if (auto s = top.child("fusion", "fusion")) {
    s->choice("strategy", c.strategy, parse_fusion_strategy, strategies);
    s->list("compare", c.compare, [&](const json& j, const std::string& where) {
      return Section::as_choice<FusionStrategy>(j, where, parse_fusion_strategy, strategies);
    });
  }
  if (auto s = top.child("eval", "eval")) {
    auto& e = c.eval;
    s->choice("protocol", e.protocol, parse_protocol, "louo, within_user, windowed");
    s->integer("repeats", e.repeats);
    s->number("test_fraction", e.test_fraction);
    s->list("windows", e.windows, Section::as_number);
    s->choice("window_protocol", e.window_protocol, parse_protocol, "louo, within_user");
    if (const json* v = s->find("seed")) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
        throw ConfigError("eval.seed: expected a non-negative integer");
      }
      e.seed = v->get<std::uint64_t>();
    }
    s->boolean("inject_leakage", e.inject_leakage);
  }
  c.validate();
  return c;
}

void wrap(const std::string& key, const std::function<void()>& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::Louo: return "louo";
    case Protocol::WithinUser: return "within_user";
    case Protocol::Windowed: return "windowed";
  }
  return "louo";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  if (name == "louo") return Protocol::Louo;
  if (name == "within_user") return Protocol::WithinUser;
  if (name == "windowed") return Protocol::Windowed;
  return std::nullopt;
}

std::string_view to_string(EegMethod method) { return method == EegMethod::Csp ? "csp" : "pyeeg"; }

std::optional<EegMethod> parse_eeg_method(std::string_view name) {
  if (name == "pyeeg") return EegMethod::Pyeeg;
  if (name == "csp") return EegMethod::Csp;
  return std::nullopt;
}

std::vector<HyperParams> ModelConfig::grid_for(ClassifierKind kind) const {
  switch (kind) {
    case ClassifierKind::Svm: return svm_grid(svm_kernels, svm_c, svm_gamma);
    case ClassifierKind::RandomForest: return rf_grid(rf_n_trees, rf_max_depth, rf_min_leaf);
    case ClassifierKind::NaiveBayes: return {NbParams{nb_var_smoothing}};
  }
  return {};
}

ModelSpec ModelConfig::spec() const {
  return {grid_for(classifier), grid_for(meta_classifier), cv_folds, stacking_folds};
}

void PipelineConfig::validate() const {
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  wrap("ivt", [&] { ivt.validate(); });
  const auto& f = eeg_preproc.filter;
  if (!(f.highpass_hz > 0.0 && f.highpass_hz < f.lowpass_hz)) {
    throw ConfigError("filter.highpass_hz: require 0 < highpass_hz < lowpass_hz");
  }
  if (!(f.notch_halfwidth_hz > 0.0) || !(f.notch_center_hz - f.notch_halfwidth_hz > f.highpass_hz)) {
    throw ConfigError("filter.notch_center_hz: notch band must lie above highpass_hz");
  }
  if (f.order < 2 || f.order % 2 != 0) throw ConfigError("filter.order: must be even and >= 2");
  if (!(eeg_preproc.bad_channel_z > 0.0)) throw ConfigError("filter.bad_channel_z: must be > 0");
  if (!(epoching.min_duration_s > 0.0)) throw ConfigError("epoching.min_duration_s: must be > 0");
  if (!(epoching.edge_guard_s >= 0.0)) throw ConfigError("epoching.edge_guard_s: must be >= 0");

  const auto& e = eeg_features;
  if (e.bands.size() != 5) throw ConfigError("eeg_features.bands: exactly five bands are required");
  for (const auto& b : e.bands) {
    if (!(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz)) {
      throw ConfigError("eeg_features.bands: band '" + b.name + "' needs 0 <= lo_hz < hi_hz");
    }
  }
  if (e.higuchi_kmax < 2) throw ConfigError("eeg_features.higuchi_kmax: must be >= 2");
  for (int b : e.dfa_boxes) {
    if (b < 4) throw ConfigError("eeg_features.dfa_boxes: box sizes must be >= 4");
  }
  if (!(e.variance_target > 0.0 && e.variance_target <= 1.0)) {
    throw ConfigError("eeg_features.variance_target: must lie in (0, 1]");
  }
  if (e.csp_components < 2 || e.csp_components % 2 != 0) {
    throw ConfigError("eeg_features.csp_components: must be even and >= 2");
  }
  gaze_features.validate();

  const auto& m = model;
  if (m.cv_folds < 2) throw ConfigError("model.cv_folds: must be >= 2");
  if (m.stacking_folds < 2) throw ConfigError("model.stacking_folds: must be >= 2");
  if (m.svm_kernels.empty()) throw ConfigError("model.svm.kernels: must not be empty");
  if (m.svm_c.empty()) throw ConfigError("model.svm.c: must not be empty");
  for (double c : m.svm_c) {
    if (!(c > 0.0)) throw ConfigError("model.svm.c: values must be > 0");
  }
  if (m.svm_gamma.empty()) throw ConfigError("model.svm.gamma: must not be empty");
  for (double g : m.svm_gamma) {
    if (!(g > 0.0)) throw ConfigError("model.svm.gamma: values must be > 0");
  }
  if (m.rf_n_trees.empty() || m.rf_max_depth.empty() || m.rf_min_leaf.empty()) {
    throw ConfigError("model.rf: n_trees, max_depth and min_leaf must not be empty");
  }
  for (int t : m.rf_n_trees) {
    if (t < 1) throw ConfigError("model.rf.n_trees: values must be >= 1");
  }
  for (int l : m.rf_min_leaf) {
    if (l < 1) throw ConfigError("model.rf.min_leaf: values must be >= 1");
  }
  if (!(m.nb_var_smoothing > 0.0)) throw ConfigError("model.nb.var_smoothing: must be > 0");

  for (auto s : compare) {
    if (s == strategy) throw ConfigError("fusion.compare: must not repeat fusion.strategy");
  }
  std::set<FusionStrategy> uniq(compare.begin(), compare.end());
  if (uniq.size() != compare.size()) throw ConfigError("fusion.compare: duplicate strategy");

  const auto& v = eval;
  if (v.repeats < 1) throw ConfigError("eval.repeats: must be >= 1");
  if (!(v.test_fraction > 0.0 && v.test_fraction < 1.0)) {
    throw ConfigError("eval.test_fraction: must lie in (0, 1)");
  }
  if (v.window_protocol == Protocol::Windowed) {
    throw ConfigError("eval.window_protocol: must be louo or within_user");
  }
  if (v.protocol == Protocol::Windowed && v.windows.empty()) {
    throw ConfigError("eval.windows: must not be empty for the windowed protocol");
  }
  for (double w : v.windows) {
    if (!(w > 0.0)) throw ConfigError("eval.windows: window sizes must be > 0");
  }
}

PipelineConfig parse_config_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return from_json(root);
}

PipelineConfig parse_config_yaml(std::string_view text) {
  YAML::Node node;
  try {
    node = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration is not valid YAML: ") + e.what());
  }
  return from_json(yaml_to_json(node));
}

PipelineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (file.extension() == ".json") return parse_config_json(ss.str());
  return parse_config_yaml(ss.str());
}

std::string config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["dataset"] = c.dataset.string();
  j["output_dir"] = c.output_dir.string();
  j["ivt"] = {{"max_gap_s", c.ivt.max_gap_s},
              {"median_window", c.ivt.median_window},
              {"velocity_window_s", c.ivt.velocity_window_s},
              {"threshold_deg_s", c.ivt.threshold_deg_s},
              {"merge_max_gap_s", c.ivt.merge_max_gap_s},
              {"merge_max_angle_deg", c.ivt.merge_max_angle_deg},
              {"min_fixation_s", c.ivt.min_fixation_s}};
  const auto& f = c.eeg_preproc.filter;
  j["filter"] = {{"highpass_hz", f.highpass_hz},
                 {"lowpass_hz", f.lowpass_hz},
                 {"notch_center_hz", f.notch_center_hz},
                 {"notch_halfwidth_hz", f.notch_halfwidth_hz},
                 {"order", f.order},
                 {"bad_channel_z", c.eeg_preproc.bad_channel_z},
                 {"montage_file", c.eeg_preproc.montage_file.string()}};
  j["epoching"] = {{"min_duration_s", c.epoching.min_duration_s},
                   {"edge_guard_s", c.epoching.edge_guard_s}};
  ordered_json bands = ordered_json::array();
  for (const auto& b : c.eeg_features.bands) {
    bands.push_back({{"name", b.name}, {"lo_hz", b.lo_hz}, {"hi_hz", b.hi_hz}, {"closed_hi", b.closed_hi}});
  }
  j["eeg_features"] = {{"method", to_string(c.eeg_method)},
                       {"bands", bands},
                       {"higuchi_kmax", c.eeg_features.higuchi_kmax},
                       {"dfa_boxes", c.eeg_features.dfa_boxes},
                       {"variance_target", c.eeg_features.variance_target},
                       {"csp_components", c.eeg_features.csp_components}};
  ordered_json gaze = {{"clustering_threshold", c.gaze_features.clustering_threshold}};
  if (c.gaze_features.pinned_selection) gaze["pinned_selection"] = *c.gaze_features.pinned_selection;
  j["gaze_features"] = gaze;
  const auto& m = c.model;
  std::vector<std::string> kernels;
  for (auto k : m.svm_kernels) kernels.emplace_back(to_string(k));
  j["model"] = {{"classifier", to_string(m.classifier)},
                {"meta_classifier", to_string(m.meta_classifier)},
                {"cv_folds", m.cv_folds},
                {"stacking_folds", m.stacking_folds},
                {"svm", {{"kernels", kernels}, {"c", m.svm_c}, {"gamma", m.svm_gamma}}},
                {"rf", {{"n_trees", m.rf_n_trees}, {"max_depth", m.rf_max_depth}, {"min_leaf", m.rf_min_leaf}}},
                {"nb", {{"var_smoothing", m.nb_var_smoothing}}}};
  std::vector<std::string> compare;
  for (auto s : c.compare) compare.emplace_back(to_string(s));
  j["fusion"] = {{"strategy", to_string(c.strategy)}, {"compare", compare}};
  j["eval"] = {{"protocol", to_string(c.eval.protocol)},
               {"repeats", c.eval.repeats},
               {"test_fraction", c.eval.test_fraction},
               {"windows", c.eval.windows},
               {"window_protocol", to_string(c.eval.window_protocol)},
               {"seed", c.eval.seed},
               {"inject_leakage", c.eval.inject_leakage}};
  return j.dump(2);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [section, names] : schema()) {
    for (const auto& k : names) keys.push_back(join(section, k));
  }
  return keys;
}

}  // namespace intent
