#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "rfe/harness.h"
#include "rfe/util/csv.h"
#include "rfe/util/parallel.h"

namespace rfe::harness {

using nlohmann::json;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::control_loss: return "control_loss";
    case RunStatus::flagged: return "flagged";
  }
  return "unknown";
}

RunStatus run_status_from_string(std::string_view s) {
  for (auto st : {RunStatus::ok, RunStatus::control_loss, RunStatus::flagged}) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("unknown run status: " + std::string(s));
}

std::uint64_t scenario_seed(std::uint64_t base, road::Scenario s) {
  return util::fnv1a(road::to_string(s), base);
}

std::filesystem::path Paths::corpus(std::string_view name) const {
  return corpus_dir() / (std::string(name) + ".csv");
}

std::filesystem::path Paths::model(std::string_view mode, std::string_view scope,
                                   summary::Ablation a) const {
  return models_dir() /
         (std::string(mode) + "_" + std::string(scope) + "_" + std::string(summary::to_string(a)) +
          ".json");
}

std::vector<RunRecord> simulate_records(const road::RoadSection& section,
                                        const std::vector<vehsim::RunConfig>& configs,
                                        unsigned threads) {
  const vehsim::VehicleParams vp;
  const vehsim::TyreParams tp;
  const auto map = road::decimate(section, rsu::kMaxMapSamples);
  const auto road = summary::road_block(section);
  std::vector<RunRecord> out(configs.size());
  util::parallel_for(configs.size(), threads, [&](size_t i) {
    auto& rec = out[i];
    rec.config = configs[i];
    const auto run = vehsim::simulate_run(section, vp, tp, configs[i]);
    rec.label = run.truth.label;
    rec.control_loss = run.truth.control_loss;
    rec.status = run.truth.control_loss ? RunStatus::control_loss : RunStatus::ok;
    try {
      const auto trace = observer::estimate_vehicle_state(run.log, vp, map);
      const auto ks = rsu::quantize_f32(summary::build_summary(trace));
      rec.values = summary::full_values(ks, &road);
    } catch (const std::exception&) {
      rec.status = RunStatus::flagged;
      rec.values.clear();
    }
  });
  return out;
}

namespace {

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunMeta>& runs) {
  util::CsvTable t;
  t.header = {"run_id", "scenario", "mu_base", "wear", "target_speed_kmh", "label", "status",
              "split"};
  for (const auto& r : runs) {
    t.rows.push_back({r.run_id, r.scenario, util::format_double(r.mu_base),
                      util::format_double(r.wear), util::format_double(r.target_speed_kmh),
                      util::format_double(r.label), std::string(to_string(r.status)), r.split});
  }
  util::write_csv(path, t);
}

}  // namespace

std::vector<RunMeta> read_runs(const std::filesystem::path& path) {
  const auto t = util::read_csv(path);
  std::vector<RunMeta> out;
  const size_t c_id = t.column("run_id"), c_sc = t.column("scenario"), c_mu = t.column("mu_base"),
               c_w = t.column("wear"), c_v = t.column("target_speed_kmh"),
               c_l = t.column("label"), c_st = t.column("status"), c_sp = t.column("split");
  for (const auto& row : t.rows) {
    RunMeta m;
    m.run_id = row[c_id];
    m.scenario = row[c_sc];
    m.mu_base = util::parse_double(row[c_mu]);
    m.wear = util::parse_double(row[c_w]);
    m.target_speed_kmh = util::parse_double(row[c_v]);
    m.label = util::parse_double(row[c_l]);
    m.status = run_status_from_string(row[c_st]);
    m.split = row[c_sp];
    out.push_back(std::move(m));
  }
  return out;
}

GenerateSummary cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.corpus_dir());
  const auto grid = cfg.effective_mu_grid();
  const int n_runs = cfg.runs_per_level * static_cast<int>(grid.size());

  GenerateSummary gs;
  summary::Corpus combined;
  combined.feature_names = summary::all_feature_names();
  std::vector<RunMeta> runs;
  json scen_json = json::object();

  for (auto sc : cfg.scenarios) {
    const std::string name(road::to_string(sc));
    const auto section = road::build_scenario(sc);
    vehsim::SamplingOptions so;
    so.perception_lo = cfg.perception_lo;
    so.perception_hi = cfg.perception_hi;
    so.mu_grid = grid;
    const auto configs =
        vehsim::sample_run_configs(section, sc, n_runs, scenario_seed(cfg.seed, sc), so);
    const auto records = simulate_records(section, configs, cfg.threads);

    summary::Corpus corpus;
    corpus.feature_names = summary::all_feature_names();
    std::map<double, std::pair<size_t, size_t>> per_level;  // lost, total
    size_t lost = 0, flagged = 0;
    for (const auto& rec : records) {
      auto& lvl = per_level[rec.config.mu_base];
      lvl.second++;
      if (rec.control_loss) {
        lvl.first++;
        lost++;
      }
      if (rec.status == RunStatus::flagged) flagged++;
      runs.push_back({rec.config.run_id, name, rec.config.mu_base, rec.config.wear,
                      rec.config.target_speed_kmh, rec.label, rec.status, "excluded"});
      if (rec.status != RunStatus::ok) continue;
      corpus.rows.push_back({rec.config.run_id, name, rec.label, rec.values});
    }
    json levels = json::array();
    for (const auto& [mu, c] : per_level) {
      const double frac = static_cast<double>(c.first) / static_cast<double>(c.second);
      levels.push_back({{"mu_base", mu}, {"control_loss_fraction", frac}});
      if (frac > cfg.loss_warning_fraction) {
        gs.warnings.push_back(name + ": control-loss fraction " + util::format_double(frac) +
                              " at mu_base " + util::format_double(mu));
      }
    }
    summary::write_corpus_csv(paths.corpus(name), corpus);
    gs.rows[name] = corpus.rows.size();
    gs.control_loss_runs[name] = lost;
    scen_json[name] = {{"runs", records.size()},
                       {"rows", corpus.rows.size()},
                       {"control_loss_runs", lost},
                       {"flagged_runs", flagged},
                       {"levels", std::move(levels)},
                       {"fingerprint", util::file_fingerprint(paths.corpus(name))}};
    for (auto& r : corpus.rows) combined.rows.push_back(std::move(r));
  }

  // Split markers come from one stratified draw on the combined corpus.
  std::map<std::string, double> mu_by_run;
  for (const auto& r : runs) mu_by_run[r.run_id] = r.mu_base;
  const auto ds = learn::from_corpus(combined, mu_by_run);
  const auto split = learn::stratified_split(ds, cfg.test_fraction, cfg.split_seed);
  std::map<std::string, std::string> marker;
  for (size_t i : split.train) marker[ds.run_ids[i]] = "train";
  for (size_t i : split.test) marker[ds.run_ids[i]] = "test";
  for (auto& r : runs) {
    auto it = marker.find(r.run_id);
    if (it != marker.end()) r.split = it->second;
  }

  summary::write_corpus_csv(paths.corpus("combined"), combined);
  write_runs_csv(paths.runs_csv(), runs);
  gs.rows["combined"] = combined.rows.size();
  gs.combined_fingerprint = util::file_fingerprint(paths.corpus("combined"));

  json m;
  m["config"] = cfg.to_kv();
  m["scenarios"] = std::move(scen_json);
  m["combined"] = {{"rows", combined.rows.size()},
                   {"train_rows", split.train.size()},
                   {"test_rows", split.test.size()},
                   {"fingerprint", gs.combined_fingerprint}};
  m["runs_fingerprint"] = util::file_fingerprint(paths.runs_csv());
  m["warnings"] = gs.warnings;
  util::write_file(paths.manifest(), m.dump(1));
  return gs;
}

LoadedCorpus load_split(const ExperimentConfig& cfg, const std::filesystem::path& out,
                        std::string_view corpus_name, const std::vector<std::string>& features) {
  const Paths paths{out};
  if (!std::filesystem::exists(paths.manifest())) {
    throw ValidationError("no manifest under " + out.string() + "; run generate first");
  }
  const json m = json::parse(util::read_file(paths.manifest()));
  const std::string name(corpus_name);
  const std::string recorded = name == "combined"
                                   ? m.at("combined").at("fingerprint").get<std::string>()
                                   : m.at("scenarios").at(name).at("fingerprint").get<std::string>();
  LoadedCorpus lc;
  lc.fingerprint = util::file_fingerprint(paths.corpus(name));
  if (lc.fingerprint != recorded) {
    throw ValidationError("corpus " + name + " does not match the manifest fingerprint");
  }
  if (util::file_fingerprint(paths.runs_csv()) != m.at("runs_fingerprint").get<std::string>()) {
    throw ValidationError("runs.csv does not match the manifest fingerprint");
  }

  const auto corpus = summary::read_corpus_csv(paths.corpus(name));
  for (const auto& f : features) {
    if (std::find(corpus.feature_names.begin(), corpus.feature_names.end(), f) ==
        corpus.feature_names.end()) {
      throw ValidationError("corpus " + name + " lacks feature " + f);
    }
  }
  std::map<std::string, double> mu_by_run;
  std::map<std::string, std::string> split_by_run;
  for (const auto& r : read_runs(paths.runs_csv())) {
    mu_by_run[r.run_id] = r.mu_base;
    split_by_run[r.run_id] = r.split;
  }
  const auto all = learn::from_corpus(corpus, mu_by_run).select_features(features);
  std::vector<size_t> train, test;
  for (size_t i = 0; i < all.rows(); ++i) {
    const auto& s = split_by_run.at(all.run_ids[i]);
    if (s == "train") {
      train.push_back(i);
    } else if (s == "test") {
      test.push_back(i);
    } else {
      throw ValidationError("corpus row " + all.run_ids[i] + " has no split marker");
    }
  }
  const auto perm = learn::shuffled_indices(train.size(), cfg.shuffle_seed);
  std::vector<size_t> shuffled(train.size());
  for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = train[perm[i]];
  lc.train = all.select_rows(shuffled);
  lc.test = all.select_rows(test);
  return lc;
}

}  // namespace rfe::harness
