#include <algorithm>
#include <sstream>

#include "rfe/harness.h"
#include "rfe/util/csv.h"

namespace rfe::harness {
namespace {

std::vector<std::string> names_of(const std::vector<road::Scenario>& v) {
  std::vector<std::string> out;
  for (auto s : v) out.emplace_back(road::to_string(s));
  return out;
}

std::vector<road::Scenario> scenarios_of(const std::vector<std::string>& names) {
  std::vector<road::Scenario> out;
  for (const auto& n : names) out.push_back(road::scenario_from_string(n));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v, auto&& fmt) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

}  // namespace

ExperimentConfig::ExperimentConfig()
    : scenarios(road::normal_scenarios()),
      ablations{summary::Ablation::full, summary::Ablation::no_sideslip,
                summary::Ablation::no_speed},
      batch_sizes{1, 10, 50, 100},
      extreme_scenarios(road::extreme_scenarios()),
      extreme_mu_grid{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0} {
  link.p_loss = 0.05;
  link.latency_ms = 20;
  link.jitter_ms = 10;
  link.seed = 5;
}

ExperimentConfig ExperimentConfig::from_kv(const util::KvConfig& kv) {
  ExperimentConfig c;
  try {
    c.scenarios = scenarios_of(kv.get_list("scenarios", names_of(c.scenarios)));
    c.runs_per_level = static_cast<int>(kv.get_int("runs_per_level", c.runs_per_level));
    c.mu_grid = kv.get_doubles("mu_grid", c.mu_grid);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.split_seed =
        static_cast<std::uint64_t>(kv.get_int("split_seed", static_cast<long long>(c.split_seed)));
    c.shuffle_seed = static_cast<std::uint64_t>(
        kv.get_int("shuffle_seed", static_cast<long long>(c.shuffle_seed)));
    c.test_fraction = kv.get_double("test_fraction", c.test_fraction);
    c.loss_warning_fraction = kv.get_double("loss_warning_fraction", c.loss_warning_fraction);
    c.perception_lo = kv.get_double("driver.perception_lo", c.perception_lo);
    c.perception_hi = kv.get_double("driver.perception_hi", c.perception_hi);

    c.gbt.n_estimators = static_cast<int>(kv.get_int("gbt.n_estimators", c.gbt.n_estimators));
    c.gbt.max_depth = static_cast<int>(kv.get_int("gbt.max_depth", c.gbt.max_depth));
    c.gbt.learning_rate = kv.get_double("gbt.learning_rate", c.gbt.learning_rate);
    c.gbt.min_samples_leaf =
        static_cast<int>(kv.get_int("gbt.min_samples_leaf", c.gbt.min_samples_leaf));
    c.cv_folds = static_cast<int>(kv.get_int("cv_folds", c.cv_folds));
    c.sfs_target = static_cast<size_t>(kv.get_int("sfs_target", static_cast<long long>(c.sfs_target)));

    std::vector<std::string> abl;
    for (auto a : c.ablations) abl.emplace_back(summary::to_string(a));
    c.ablations.clear();
    for (const auto& s : kv.get_list("ablations", abl)) {
      c.ablations.push_back(summary::ablation_from_string(s));
    }

    std::vector<std::string> bs;
    for (auto b : c.batch_sizes) bs.push_back(std::to_string(b));
    c.batch_sizes.clear();
    for (const auto& s : kv.get_list("sweep.batch_sizes", bs)) {
      c.batch_sizes.push_back(static_cast<size_t>(std::stoul(s)));
    }
    c.sweep_trials = static_cast<int>(kv.get_int("sweep.trials", c.sweep_trials));
    c.min_batch = static_cast<size_t>(kv.get_int("rsu.min_batch", static_cast<long long>(c.min_batch)));
    c.link.p_loss = kv.get_double("link.p_loss", c.link.p_loss);
    c.link.latency_ms = kv.get_double("link.latency_ms", c.link.latency_ms);
    c.link.jitter_ms = kv.get_double("link.jitter_ms", c.link.jitter_ms);
    c.link.seed =
        static_cast<std::uint64_t>(kv.get_int("link.seed", static_cast<long long>(c.link.seed)));
    c.session_vehicles = static_cast<int>(kv.get_int("session.vehicles", c.session_vehicles));
    c.session_mu = kv.get_double("session.mu", c.session_mu);

    c.extreme_scenarios =
        scenarios_of(kv.get_list("extreme.scenarios", names_of(c.extreme_scenarios)));
    c.extreme_mu_grid = kv.get_doubles("extreme.mu_grid", c.extreme_mu_grid);
    c.extreme_runs_per_level =
        static_cast<int>(kv.get_int("extreme.runs_per_level", c.extreme_runs_per_level));
    c.threads = static_cast<unsigned>(kv.get_int("threads", c.threads));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ValidationError("unknown config key: " + unused.front());
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  util::KvConfig kv;
  try {
    kv = util::KvConfig::load(path);
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  return from_kv(kv);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (scenarios.empty()) fail("no scenarios configured");
  for (auto s : scenarios) {
    if (road::is_extreme(s)) fail("training scenarios must not include extreme courses");
  }
  if (runs_per_level < 10) fail("runs_per_level must be >= 10");
  for (double m : effective_mu_grid()) {
    if (!(m > 0 && m <= 1.2)) fail("mu grid values must lie in (0, 1.2]");
  }
  if (!(perception_lo > 0) || perception_hi < perception_lo) {
    fail("driver perception range must satisfy 0 < lo <= hi");
  }
  if (!(test_fraction > 0 && test_fraction < 0.5)) fail("test_fraction must lie in (0, 0.5)");
  try {
    gbt.validate();
    link.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }
  if (cv_folds < 2) fail("cv_folds must be >= 2");
  if (sfs_target < 1) fail("sfs_target must be >= 1");
  if (ablations.empty()) fail("no ablations configured");
  if (std::find(ablations.begin(), ablations.end(), summary::Ablation::full) == ablations.end()) {
    fail("ablations must include full");
  }
  if (std::find(ablations.begin(), ablations.end(), summary::Ablation::subset) != ablations.end()) {
    fail("the subset ablation needs an explicit feature list and is not a pipeline ablation");
  }
  if (batch_sizes.empty()) fail("no batch sizes configured");
  for (auto b : batch_sizes) {
    if (b == 0) fail("batch sizes must be >= 1");
  }
  if (sweep_trials < 1) fail("sweep.trials must be >= 1");
  if (session_vehicles < 1) fail("session.vehicles must be >= 1");
  if (extreme_mu_grid.empty() || extreme_runs_per_level < 1) fail("extreme set is empty");
  for (auto s : extreme_scenarios) {
    if (!road::is_extreme(s)) fail("extreme.scenarios must list extreme courses only");
  }
}

std::vector<double> ExperimentConfig::effective_mu_grid() const {
  return mu_grid.empty() ? vehsim::default_mu_grid() : mu_grid;
}

std::string ExperimentConfig::to_kv() const {
  auto fd = [](double v) { return util::format_double(v); };
  auto sz = [](size_t v) { return std::to_string(v); };
  std::ostringstream o;
  o << "scenarios = " << join(names_of(scenarios), [](const std::string& s) { return s; }) << '\n'
    << "runs_per_level = " << runs_per_level << '\n'
    << "mu_grid = " << join(effective_mu_grid(), fd) << '\n'
    << "seed = " << seed << '\n'
    << "split_seed = " << split_seed << '\n'
    << "shuffle_seed = " << shuffle_seed << '\n'
    << "test_fraction = " << fd(test_fraction) << '\n'
    << "loss_warning_fraction = " << fd(loss_warning_fraction) << '\n'
    << "driver.perception_lo = " << fd(perception_lo) << '\n'
    << "driver.perception_hi = " << fd(perception_hi) << '\n'
    << "gbt.n_estimators = " << gbt.n_estimators << '\n'
    << "gbt.max_depth = " << gbt.max_depth << '\n'
    << "gbt.learning_rate = " << fd(gbt.learning_rate) << '\n'
    << "gbt.min_samples_leaf = " << gbt.min_samples_leaf << '\n'
    << "cv_folds = " << cv_folds << '\n'
    << "sfs_target = " << sfs_target << '\n'
    << "ablations = "
    << join(ablations, [](summary::Ablation a) { return std::string(summary::to_string(a)); })
    << '\n'
    << "sweep.batch_sizes = " << join(batch_sizes, sz) << '\n'
    << "sweep.trials = " << sweep_trials << '\n'
    << "rsu.min_batch = " << min_batch << '\n'
    << "link.p_loss = " << fd(link.p_loss) << '\n'
    << "link.latency_ms = " << fd(link.latency_ms) << '\n'
    << "link.jitter_ms = " << fd(link.jitter_ms) << '\n'
    << "link.seed = " << link.seed << '\n'
    << "session.vehicles = " << session_vehicles << '\n'
    << "session.mu = " << fd(session_mu) << '\n'
    << "extreme.scenarios = "
    << join(names_of(extreme_scenarios), [](const std::string& s) { return s; }) << '\n'
    << "extreme.mu_grid = " << join(extreme_mu_grid, fd) << '\n'
    << "extreme.runs_per_level = " << extreme_runs_per_level << '\n'
    << "threads = " << threads << '\n';
  return o.str();
}

}  // namespace rfe::harness
