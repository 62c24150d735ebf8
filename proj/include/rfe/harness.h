#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfe/learn.h"
#include "rfe/observer.h"
#include "rfe/road.h"
#include "rfe/rsu.h"
#include "rfe/summary.h"
#include "rfe/util/kv_config.h"
#include "rfe/vehsim.h"

namespace rfe::harness {

/// Raised for malformed configs and inconsistent inputs; the CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<road::Scenario> scenarios;  // training scenarios
  int runs_per_level = 100;
  std::vector<double> mu_grid;  // empty: vehsim default grid
  std::uint64_t seed = 20240601;
  std::uint64_t split_seed = 90;
  std::uint64_t shuffle_seed = 8;
  double test_fraction = 0.1;
  double loss_warning_fraction = 0.2;
  double perception_lo = 1.0;  // driver grip-perception factor range
  double perception_hi = 1.0;

  learn::GbtParams gbt;
  int cv_folds = 8;
  size_t sfs_target = 15;
  std::vector<summary::Ablation> ablations;

  std::vector<size_t> batch_sizes;
  int sweep_trials = 20000;
  size_t min_batch = 50;
  rsu::LinkModel link;
  int session_vehicles = 60;
  double session_mu = 0.6;

  std::vector<road::Scenario> extreme_scenarios;
  std::vector<double> extreme_mu_grid;
  int extreme_runs_per_level = 20;

  unsigned threads = 0;

  ExperimentConfig();
  static ExperimentConfig from_kv(const util::KvConfig& kv);
  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;
  std::vector<double> effective_mu_grid() const;
  /// Canonical key = value rendering, recorded in the manifest.
  std::string to_kv() const;
};

enum class RunStatus { ok, control_loss, flagged };
std::string_view to_string(RunStatus s);
RunStatus run_status_from_string(std::string_view s);

struct RunRecord {
  vehsim::RunConfig config;
  double label = 0;
  RunStatus status = RunStatus::ok;
  bool control_loss = false;
  std::vector<double> values;  // all_feature_names() order, kinematic part f32-rounded
};

/// Simulates, observes and summarises every configuration. Runs whose
/// summary cannot be built are marked flagged; control-loss runs are marked
/// but still summarised when possible.
std::vector<RunRecord> simulate_records(const road::RoadSection& section,
                                        const std::vector<vehsim::RunConfig>& configs,
                                        unsigned threads);

std::uint64_t scenario_seed(std::uint64_t base, road::Scenario s);

/// Output layout under --out.
struct Paths {
  std::filesystem::path root;
  std::filesystem::path corpus_dir() const { return root / "corpus"; }
  std::filesystem::path corpus(std::string_view name) const;
  std::filesystem::path runs_csv() const { return corpus_dir() / "runs.csv"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path models_dir() const { return root / "models"; }
  std::filesystem::path model(std::string_view mode, std::string_view scope,
                              summary::Ablation a) const;
  std::filesystem::path reports_dir() const { return root / "reports"; }
  std::filesystem::path plots_dir() const { return root / "plots"; }
};

/// One row of runs.csv.
struct RunMeta {
  std::string run_id;
  std::string scenario;
  double mu_base = 0;
  double wear = 0;
  double target_speed_kmh = 0;
  double label = 0;
  RunStatus status = RunStatus::ok;
  std::string split;  // train, test or excluded
};

struct GenerateSummary {
  std::map<std::string, size_t> rows;              // per corpus name
  std::map<std::string, size_t> control_loss_runs;  // per scenario
  std::vector<std::string> warnings;
  std::string combined_fingerprint;
};

GenerateSummary cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out);

std::vector<RunMeta> read_runs(const std::filesystem::path& path);

/// Training set of a corpus (combined or per scenario), shuffled with the
/// configured seed and restricted to the requested feature names.
struct LoadedCorpus {
  learn::Dataset train;
  learn::Dataset test;
  std::string fingerprint;
};
LoadedCorpus load_split(const ExperimentConfig& cfg, const std::filesystem::path& out,
                        std::string_view corpus_name, const std::vector<std::string>& features);

enum class TrainMode { local, global };
std::string_view to_string(TrainMode m);
TrainMode train_mode_from_string(std::string_view s);

struct TrainSummary {
  std::vector<std::filesystem::path> models;
  std::map<std::string, std::vector<double>> cv_scores;  // per model scope
};

TrainSummary cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out,
                       TrainMode mode, summary::Ablation ablation, bool run_cv = true);

struct ScenarioScore {
  std::string scenario;
  size_t test_rows = 0;
  double global_mape = 0;
  double local_mape = 0;
};

struct AblationResult {
  summary::Ablation ablation = summary::Ablation::full;
  std::vector<ScenarioScore> scenarios;
  double combined_global_mape = 0;
  double residual_mean = 0;  // global, combined test set
};

struct EvaluationReport {
  std::string corpus_fingerprint;
  std::uint64_t seed = 0;
  std::vector<AblationResult> ablations;

  const AblationResult& at(summary::Ablation a) const;
  std::string to_json() const;
};

EvaluationReport cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// generate, then train (local and global for every ablation), then evaluate.
EvaluationReport run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct BatchCurve {
  double mu_base = 0;
  std::vector<size_t> batch_sizes;
  std::vector<double> median_error_pct;  // per batch size
  std::vector<double> p90_error_pct;
};

std::vector<BatchCurve> cmd_sweep_batches(const ExperimentConfig& cfg,
                                          const std::filesystem::path& out);

struct SfsReport {
  learn::SfsResult sfs;
  double all_features_cv = 0;
};

SfsReport cmd_sfs(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct ExtremeReport {
  double extreme_mape = 0;
  double normal_mape = 0;
  double mean_residual_high_mu = 0;  // mu_base >= 0.8
  std::map<std::string, double> per_manoeuvre_mape;
  size_t runs = 0;
  size_t control_loss_runs = 0;
};

ExtremeReport cmd_extreme(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// RSU session per scenario plus a consolidated report.json / report.md.
void cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace rfe::harness
