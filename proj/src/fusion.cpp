#include "intent/fusion.hpp"

#include "intent/grid_search.hpp"
#include "intent/rng.hpp"

#include <stdexcept>

namespace intent {

namespace {

enum Stream : std::uint64_t { kEegTune = 1, kGazeTune, kEarlyTune, kMetaTune, kStacking, kFit };

Eigen::MatrixXd concat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

struct Tuned {
  HyperParams params;
  Classifier model;
};

Tuned tune_and_fit(const Eigen::MatrixXd& x, std::span<const int> labels,
                   std::span<const HyperParams> grid, int folds, std::uint64_t tune_seed,
                   std::uint64_t fit_seed, std::vector<std::string>& warnings) {
  if (x.cols() == 0) throw std::invalid_argument("fusion: branch has no features");
  const GridSearchResult gs = grid_search(x, labels, grid, folds, tune_seed);
  warnings.insert(warnings.end(), gs.warnings.begin(), gs.warnings.end());
  return {gs.best, Classifier::train(x, labels, gs.best, fit_seed, &warnings)};
}

void check_inputs(const FusionModel& m, const Eigen::MatrixXd& eeg, const Eigen::MatrixXd& gaze) {
  const bool uses_eeg = m.strategy != FusionStrategy::GazeOnly;
  const bool uses_gaze = m.strategy != FusionStrategy::EegOnly;
  if ((uses_eeg && eeg.cols() != m.eeg_dim) || (uses_gaze && gaze.cols() != m.gaze_dim)) {
    throw std::invalid_argument("predict_fusion: feature dimension differs from the fitted model");
  }
  if (uses_eeg && uses_gaze && eeg.rows() != gaze.rows()) {
    throw std::invalid_argument("predict_fusion: modality row counts differ");
  }
}

FusionPrediction from_scores(Eigen::VectorXd scores) {
  FusionPrediction p;
  p.labels.resize(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) p.labels[static_cast<std::size_t>(i)] = scores(i) > 0.0 ? 1 : 0;
  p.scores = std::move(scores);
  return p;
}

}  // namespace

std::string_view to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::Early: return "early";
    case FusionStrategy::Late: return "late";
    case FusionStrategy::Hybrid: return "hybrid";
    case FusionStrategy::EegOnly: return "none-eeg";
    case FusionStrategy::GazeOnly: return "none-gaze";
  }
  return "early";
}

std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name) {
  for (auto s : {FusionStrategy::Early, FusionStrategy::Late, FusionStrategy::Hybrid,
                 FusionStrategy::EegOnly, FusionStrategy::GazeOnly}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

FeatureVector early_fuse(const FeatureVector& eeg, const FeatureVector& gaze) {
  if (eeg.epoch_id != gaze.epoch_id) {
    throw std::invalid_argument("early_fuse: epoch mismatch (" + eeg.epoch_id + " vs " +
                                gaze.epoch_id + ")");
  }
  if (eeg.values.size() != eeg.names.size() || gaze.values.size() != gaze.names.size()) {
    throw std::invalid_argument("early_fuse: names and values differ in length");
  }
  FeatureVector out;
  out.modality = Modality::Fused;
  out.epoch_id = eeg.epoch_id;
  out.values = eeg.values;
  out.values.insert(out.values.end(), gaze.values.begin(), gaze.values.end());
  for (const auto& n : eeg.names) out.names.push_back("eeg." + n);
  for (const auto& n : gaze.names) out.names.push_back("gaze." + n);
  out.warnings = eeg.warnings;
  out.warnings.insert(out.warnings.end(), gaze.warnings.begin(), gaze.warnings.end());
  return out;
}

std::size_t FusionModel::classifier_count() const {
  return std::size_t(eeg_classifier.has_value()) + gaze_classifier.has_value() +
         early_classifier.has_value() + meta_classifier.has_value();
}

Eigen::Index FusionModel::meta_input_dim() const {
  if (strategy == FusionStrategy::Late) return 2;
  if (strategy == FusionStrategy::Hybrid) return 3;
  return 0;
}

FusionModel train_fusion(const Eigen::MatrixXd& eeg, const Eigen::MatrixXd& gaze,
                         std::span<const int> labels, FusionStrategy strategy,
                         const ModelSpec& spec, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  const bool uses_eeg = strategy != FusionStrategy::GazeOnly;
  const bool uses_gaze = strategy != FusionStrategy::EegOnly;
  if ((uses_eeg && eeg.rows() != n) || (uses_gaze && gaze.rows() != n)) {
    throw std::invalid_argument("train_fusion: feature rows and labels differ");
  }
  to_signed_labels(labels);  // both classes present
  if (spec.grid.empty()) throw std::invalid_argument("train_fusion: empty classifier grid");

  FusionModel m;
  m.strategy = strategy;
  m.eeg_dim = uses_eeg ? eeg.cols() : 0;
  m.gaze_dim = uses_gaze ? gaze.cols() : 0;
  auto& w = m.warnings;
  const auto fit_seed = derive_seed(seed, kFit);

  switch (strategy) {
    case FusionStrategy::EegOnly:
      m.eeg_classifier = tune_and_fit(eeg, labels, spec.grid, spec.cv_folds, derive_seed(seed, kEegTune), fit_seed, w).model;
      return m;
    case FusionStrategy::GazeOnly:
      m.gaze_classifier = tune_and_fit(gaze, labels, spec.grid, spec.cv_folds, derive_seed(seed, kGazeTune), fit_seed, w).model;
      return m;
    case FusionStrategy::Early:
      m.early_classifier = tune_and_fit(concat(eeg, gaze), labels, spec.grid, spec.cv_folds, derive_seed(seed, kEarlyTune), fit_seed, w).model;
      return m;
    case FusionStrategy::Late:
    case FusionStrategy::Hybrid:
      break;
  }

  const bool hybrid = strategy == FusionStrategy::Hybrid;
  if (spec.meta_grid.empty()) throw std::invalid_argument("train_fusion: empty meta grid");
  const Eigen::MatrixXd early = hybrid ? concat(eeg, gaze) : Eigen::MatrixXd();
  Tuned e = tune_and_fit(eeg, labels, spec.grid, spec.cv_folds, derive_seed(seed, kEegTune), fit_seed, w);
  Tuned g = tune_and_fit(gaze, labels, spec.grid, spec.cv_folds, derive_seed(seed, kGazeTune), fit_seed, w);
  std::optional<Tuned> f;
  if (hybrid) f = tune_and_fit(early, labels, spec.grid, spec.cv_folds, derive_seed(seed, kEarlyTune), fit_seed, w);

  const Eigen::Index cols = hybrid ? 3 : 2;
  const auto folds = stratified_folds(labels, spec.stacking_folds, derive_seed(seed, kStacking));
  m.meta_training_inputs = Eigen::MatrixXd::Zero(n, cols);
  m.meta_provenance.assign(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < spec.stacking_folds; ++k) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> held;
    std::vector<int> train_labels;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (folds[static_cast<std::size_t>(i)] == k) {
        held.push_back(i);
      } else {
        train.push_back(i);
        train_labels.push_back(labels[static_cast<std::size_t>(i)]);
      }
    }
    if (held.empty()) continue;
    int pos = 0;
    for (int v : train_labels) pos += v;
    if (pos == 0 || pos == static_cast<int>(train_labels.size())) {
      throw std::invalid_argument("train_fusion: stacking fold with a single class");
    }
    const auto fold_seed = derive_seed(fit_seed, static_cast<std::uint64_t>(k) + 1);
    const auto score = [&](const Eigen::MatrixXd& x, const HyperParams& hp, Eigen::Index col) {
      const Classifier c = Classifier::train(take_rows(x, train), train_labels, hp, fold_seed, &w);
      const Eigen::VectorXd s = c.decision_score(take_rows(x, held));
      for (std::size_t r = 0; r < held.size(); ++r) {
        m.meta_training_inputs(held[r], col) = s(static_cast<Eigen::Index>(r));
      }
    };
    score(eeg, e.params, 0);
    score(gaze, g.params, 1);
    if (hybrid) score(early, f->params, 2);
    for (Eigen::Index r : held) {
      if (m.meta_provenance[static_cast<std::size_t>(r)] != -1) {
        throw std::logic_error("train_fusion: row scored by more than one stacking fold");
      }
      m.meta_provenance[static_cast<std::size_t>(r)] = k;
    }
    for (Eigen::Index r : train) {
      if (folds[static_cast<std::size_t>(r)] == k) {
        throw std::logic_error("train_fusion: stacking model saw its held-out rows");
      }
    }
  }
  for (int p : m.meta_provenance) {
    if (p < 0) throw std::logic_error("train_fusion: meta row without out-of-fold score");
  }

  m.meta_scaler = fit_scaler(m.meta_training_inputs);
  const Eigen::MatrixXd meta_x = apply_scaler(m.meta_scaler, m.meta_training_inputs);
  m.meta_classifier = tune_and_fit(meta_x, labels, spec.meta_grid, spec.cv_folds, derive_seed(seed, kMetaTune), fit_seed, w).model;
  m.eeg_classifier = std::move(e.model);
  m.gaze_classifier = std::move(g.model);
  if (hybrid) m.early_classifier = std::move(f->model);
  return m;
}

Eigen::MatrixXd fusion_meta_inputs(const FusionModel& model, const Eigen::MatrixXd& eeg,
                                   const Eigen::MatrixXd& gaze) {
  if (model.meta_input_dim() == 0) throw std::invalid_argument("fusion_meta_inputs: no meta stage");
  check_inputs(model, eeg, gaze);
  Eigen::MatrixXd z(eeg.rows(), model.meta_input_dim());
  z.col(0) = model.eeg_classifier->decision_score(eeg);
  z.col(1) = model.gaze_classifier->decision_score(gaze);
  if (model.strategy == FusionStrategy::Hybrid) z.col(2) = model.early_classifier->decision_score(concat(eeg, gaze));
  return z;
}

FusionPrediction predict_meta(const FusionModel& model, const Eigen::MatrixXd& meta_inputs) {
  if (!model.meta_classifier || meta_inputs.cols() != model.meta_input_dim()) {
    throw std::invalid_argument("predict_meta: meta input dimension mismatch");
  }
  return from_scores(model.meta_classifier->decision_score(apply_scaler(model.meta_scaler, meta_inputs)));
}

FusionPrediction predict_fusion(const FusionModel& model, const Eigen::MatrixXd& eeg,
                                const Eigen::MatrixXd& gaze) {
  check_inputs(model, eeg, gaze);
  switch (model.strategy) {
    case FusionStrategy::EegOnly: return from_scores(model.eeg_classifier->decision_score(eeg));
    case FusionStrategy::GazeOnly: return from_scores(model.gaze_classifier->decision_score(gaze));
    case FusionStrategy::Early: return from_scores(model.early_classifier->decision_score(concat(eeg, gaze)));
    case FusionStrategy::Late:
    case FusionStrategy::Hybrid: return predict_meta(model, fusion_meta_inputs(model, eeg, gaze));
  }
  throw std::invalid_argument("predict_fusion: unknown strategy");
}

}  // namespace intent
