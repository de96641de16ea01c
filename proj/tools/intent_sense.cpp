#include "intent/config.hpp"
#include "intent/dataset.hpp"
#include "intent/evaluation.hpp"
#include "intent/gaze_preproc.hpp"
#include "intent/parallel.hpp"
#include "intent/report.hpp"
#include "intent/stats.hpp"
#include "intent/synthgen.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kLeakage = 3 };

struct GenerateArgs {
  intent::SynthSpec spec;
  std::string out;
};

struct DescribeArgs {
  std::string dataset;
  std::string out = "describe";
  std::string config;
};

struct EvaluateArgs {
  std::string config;
  std::string dataset;
  std::string out;
  std::string fusion;
  std::string protocol;
  std::string classifier;
  std::string eeg_method;
  std::optional<std::uint64_t> seed;
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : intent::collapse_warnings(warnings)) std::cerr << "warning: " << w << "\n";
}

int cmd_generate(const GenerateArgs& a) {
  if (a.spec.n_users < 1) throw intent::ConfigError("--users must be >= 1");
  if (a.spec.n_scenes < 1) throw intent::ConfigError("--scenes must be >= 1");
  try {
    a.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw intent::ConfigError(e.what());
  }
  intent::generate(a.spec, a.out);
  std::cout << "wrote " << a.spec.n_users << " users x " << a.spec.n_scenes << " scenes to " << a.out
            << "\n";
  return kOk;
}

int cmd_describe(const DescribeArgs& a) {
  intent::IvtConfig ivt;
  if (!a.config.empty()) ivt = intent::load_config(a.config).ivt;
  const intent::DatasetReader reader(a.dataset);
  std::vector<intent::TrialEvents> trials;
  std::vector<intent::ScanpathRow> scanpaths;
  std::vector<std::string> warnings;
  for (const auto& id : reader.manifest().users) {
    intent::UserLoadReport report;
    auto user = reader.read_user(id, report);
    warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
    if (!user) {
      warnings.push_back("user " + id + " skipped: " + report.failure);
      continue;
    }
    trials.insert(trials.end(), user->trials.begin(), user->trials.end());
    const auto fixations = intent::detect_fixations(user->gaze, reader.manifest().screen, ivt);
    const auto rows = intent::scanpath_rows(*user, fixations);
    scanpaths.insert(scanpaths.end(), rows.begin(), rows.end());
  }
  const auto stats = intent::search_time_stats(trials);
  const std::filesystem::path out(a.out);
  intent::write_text(out / "search_time_histogram.csv", intent::histogram_csv(stats));
  intent::write_text(out / "search_time_per_tool.csv", intent::per_tool_csv(stats));
  intent::write_text(out / "scanpath.csv", intent::scanpath_csv(scanpaths));
  print_warnings(warnings);
  std::cout << "trials=" << stats.n_trials << "\n";
  for (const char* f : {"search_time_histogram.csv", "search_time_per_tool.csv", "scanpath.csv"}) {
    std::cout << "wrote " << (out / f).string() << "\n";
  }
  return kOk;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("INTENT_SENSE_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  const std::string_view s(v);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw intent::ConfigError("INTENT_SENSE_SEED must be a non-negative integer, got '" + std::string(s) + "'");
  }
  return seed;
}

template <class T, class Parse>
T parse_choice(const std::string& flag, const std::string& value, Parse parse) {
  const auto v = parse(value);
  if (!v) throw intent::ConfigError("invalid value '" + value + "' for " + flag);
  return *v;
}

int cmd_evaluate(const EvaluateArgs& a) {
  intent::PipelineConfig cfg;
  if (!a.config.empty()) cfg = intent::load_config(a.config);
  if (!a.dataset.empty()) cfg.dataset = a.dataset;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (!a.fusion.empty()) {
    cfg.strategy = parse_choice<intent::FusionStrategy>("--fusion", a.fusion, intent::parse_fusion_strategy);
    std::erase(cfg.compare, cfg.strategy);
  }
  if (!a.protocol.empty()) cfg.eval.protocol = parse_choice<intent::Protocol>("--protocol", a.protocol, intent::parse_protocol);
  if (!a.classifier.empty()) {
    cfg.model.classifier = parse_choice<intent::ClassifierKind>("--classifier", a.classifier, intent::parse_classifier_kind);
  }
  if (!a.eeg_method.empty()) cfg.eeg_method = parse_choice<intent::EegMethod>("--eeg-method", a.eeg_method, intent::parse_eeg_method);
  if (auto s = env_seed()) cfg.eval.seed = *s;
  if (a.seed) cfg.eval.seed = *a.seed;
  if (cfg.dataset.empty()) throw intent::ConfigError("dataset: no dataset given (config key 'dataset' or --dataset)");
  cfg.validate();

  const intent::EvalRun run = intent::run_evaluation(cfg);
  const auto files = intent::write_run(run, cfg.output_dir);
  print_warnings(run.warnings);
  for (const auto& r : run.reports) print_warnings(r.warnings);

  for (const auto& r : run.reports) {
    std::cout << "protocol=" << intent::to_string(cfg.eval.protocol);
    if (cfg.eval.protocol == intent::Protocol::Windowed) {
      std::cout << "/" << intent::to_string(cfg.eval.window_protocol);
    }
    std::cout << " strategy=" << intent::to_string(r.strategy);
    if (r.window_s) std::cout << " window_s=" << intent::format_number(*r.window_s);
    std::cout << " epochs=" << r.n_epochs << " accuracy=" << intent::format_number(r.mean_accuracy)
              << " ci95=[" << intent::format_number(r.ci_lo) << "," << intent::format_number(r.ci_hi)
              << "]\n";
    for (const auto& u : r.units) {
      std::cout << "  " << u.unit << " " << intent::format_number(u.accuracy) << "\n";
    }
    for (const auto& c : r.comparisons) {
      std::cout << "  " << c.a << " vs " << c.b << ": other=" << intent::format_number(c.mean_b)
                << " t=" << intent::format_number(c.t) << " p=" << intent::format_number(c.p)
                << " alpha=" << intent::format_number(c.alpha_adjusted)
                << (c.significant ? " significant" : " not-significant") << "\n";
    }
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  std::cout << "mean_accuracy=" << intent::format_number(run.reports.back().mean_accuracy) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigational vs informational intent from EEG and gaze"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = 0;
  app.add_option("--jobs,-j", jobs, "Worker threads (0: all available cores)")->check(CLI::NonNegativeNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset");
  g->add_option("--users", gen.spec.n_users, "Number of users")->capture_default_str();
  g->add_option("--scenes", gen.spec.n_scenes, "Scenes per user")->capture_default_str();
  g->add_option("--seed", gen.spec.seed, "Generator seed")->capture_default_str();
  g->add_option("--eeg-effect", gen.spec.eeg_effect, "EEG class effect")->capture_default_str();
  g->add_option("--gaze-effect", gen.spec.gaze_effect, "Gaze class effect")->capture_default_str();
  g->add_option("--eeg-fs", gen.spec.eeg_fs_hz, "EEG sampling rate (Hz)")->capture_default_str();
  g->add_option("--gaze-fs", gen.spec.gaze_fs_hz, "Gaze sampling rate (Hz)")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  DescribeArgs desc;
  auto* d = app.add_subcommand("describe", "Search-time statistics and scanpaths");
  d->add_option("--dataset", desc.dataset, "Dataset directory")->required();
  d->add_option("--out", desc.out, "Output directory")->capture_default_str();
  d->add_option("--config", desc.config, "Pipeline config (only the ivt block is used)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Run an evaluation protocol");
  e->add_option("--config", ev.config, "Pipeline config (YAML, or JSON by extension)");
  e->add_option("--dataset", ev.dataset, "Dataset directory (overrides the config)");
  e->add_option("--out", ev.out, "Output directory (overrides the config)");
  e->add_option("--fusion", ev.fusion, "early | late | hybrid | none-eeg | none-gaze");
  e->add_option("--protocol", ev.protocol, "louo | within_user | windowed");
  e->add_option("--classifier", ev.classifier, "svm | nb | rf");
  e->add_option("--eeg-method", ev.eeg_method, "pyeeg | csp");
  e->add_option("--seed", ev.seed, "Evaluation seed (overrides INTENT_SENSE_SEED and the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    intent::set_default_jobs(jobs);
    if (g->parsed()) return cmd_generate(gen);
    if (d->parsed()) return cmd_describe(desc);
    return cmd_evaluate(ev);
  } catch (const intent::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kUsage;
  } catch (const intent::LeakageError& err) {
    std::cerr << "leakage guard: " << err.what() << "\n";
    return kLeakage;
  } catch (const intent::DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
}
