#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rfe/harness.h"
#include "rfe/util/csv.h"
#include "rfe/util/svg.h"

namespace rfe::harness {

using nlohmann::json;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::vector<std::string> global_full_features() {
  summary::FeatureSpec spec;
  return summary::feature_names(spec);
}

struct GlobalModel {
  LoadedCorpus corpus;
  learn::TrainedRegressor model;
};

GlobalModel load_global_full(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const Paths paths{out};
  GlobalModel g;
  g.corpus = load_split(cfg, out, "combined", global_full_features());
  const auto path = paths.model("global", "all", summary::Ablation::full);
  if (!std::filesystem::exists(path)) {
    throw ValidationError("missing model " + path.string() + "; run train --mode global first");
  }
  g.model = learn::load_model(path);
  if (g.model.corpus_fingerprint != g.corpus.fingerprint) {
    throw ValidationError("global model was trained on a different corpus");
  }
  const std::set<std::string> trained(g.model.training_runs.begin(), g.model.training_runs.end());
  for (const auto& id : g.corpus.test.run_ids) {
    if (trained.count(id)) throw ValidationError("train/test leakage: " + id);
  }
  return g;
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return summary::quantile_sorted(v, p);
}

std::string pct(double v) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << v;
  return o.str();
}

}  // namespace

std::vector<BatchCurve> cmd_sweep_batches(const ExperimentConfig& cfg,
                                          const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.reports_dir());
  std::filesystem::create_directories(paths.plots_dir());
  const auto g = load_global_full(cfg, out);
  const auto pred = g.model.predict(g.corpus.test);

  // Relative estimation error of each held-out run, pooled by friction level.
  std::map<double, std::vector<double>> ratios;
  for (size_t i = 0; i < pred.size(); ++i) {
    ratios[g.corpus.test.mu_base[i]].push_back(pred[i] / g.corpus.test.y[i]);
  }
  auto sizes = cfg.batch_sizes;
  std::sort(sizes.begin(), sizes.end());
  const size_t max_b = sizes.back();

  std::vector<BatchCurve> curves;
  util::CsvTable t;
  t.header = {"mu_base", "batch_size", "median_error_pct", "p90_error_pct", "pool_size"};
  std::vector<util::Series> series;
  size_t level = 0;
  for (const auto& [mu, pool] : ratios) {
    ++level;
    BatchCurve c;
    c.mu_base = mu;
    c.batch_sizes = sizes;
    const double truth = 0.9 * mu;
    std::vector<std::vector<double>> errs(sizes.size());
    std::vector<double> draw(max_b);
    for (int trial = 0; trial < cfg.sweep_trials; ++trial) {
      // Common random numbers: every batch size reuses a prefix of one draw.
      std::mt19937_64 rng(util::fnv1a(std::to_string(level) + ":" + std::to_string(trial),
                                      cfg.seed));
      for (size_t j = 0; j < max_b; ++j) {
        const double r = pool[static_cast<size_t>(rng() % pool.size())];
        const double wear = 0.8 + 0.2 * unit(rng);
        draw[j] = r * mu * wear;
      }
      for (size_t k = 0; k < sizes.size(); ++k) {
        const auto f = rsu::consensus(std::span<const double>(draw.data(), sizes[k]), 1);
        errs[k].push_back(100.0 * std::abs(f->midpoint - truth) / truth);
      }
    }
    util::Series s;
    s.label = "mu " + util::format_double(mu);
    for (size_t k = 0; k < sizes.size(); ++k) {
      c.median_error_pct.push_back(percentile(errs[k], 0.5));
      c.p90_error_pct.push_back(percentile(errs[k], 0.9));
      t.rows.push_back({util::format_double(mu), std::to_string(sizes[k]),
                        util::format_double(c.median_error_pct[k]),
                        util::format_double(c.p90_error_pct[k]), std::to_string(pool.size())});
      s.x.push_back(static_cast<double>(sizes[k]));
      s.y.push_back(c.median_error_pct[k]);
    }
    series.push_back(std::move(s));
    curves.push_back(std::move(c));
  }
  util::write_csv(paths.reports_dir() / "batch_sweep.csv", t);
  util::write_csv(paths.plots_dir() / "batch_sweep.csv", t);
  util::write_file(paths.plots_dir() / "batch_sweep.svg",
                   util::svg_lines({"Midpoint error vs batch size", "batch size",
                                    "median error [%]"},
                                   series, true));
  return curves;
}

SfsReport cmd_sfs(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.reports_dir());
  std::filesystem::create_directories(paths.plots_dir());
  const auto lc = load_split(cfg, out, "combined", global_full_features());
  const learn::CvOptions cv{cfg.cv_folds, cfg.threads};
  const size_t target = std::min(cfg.sfs_target, lc.train.cols());

  SfsReport rep;
  rep.sfs = learn::sequential_feature_selection(lc.train, target, cfg.gbt, cv);
  const auto all = learn::kfold_cv(lc.train, cfg.gbt, cv);
  rep.all_features_cv = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());

  util::CsvTable t;
  t.header = {"step", "feature", "cv_mape_pct"};
  util::Series s{"SFS", {}, {}}, ref{"all features", {}, {}};
  for (size_t i = 0; i < rep.sfs.names.size(); ++i) {
    t.rows.push_back(
        {std::to_string(i + 1), rep.sfs.names[i], util::format_double(rep.sfs.scores[i])});
    s.x.push_back(static_cast<double>(i + 1));
    s.y.push_back(rep.sfs.scores[i]);
  }
  t.rows.push_back({std::to_string(lc.train.cols()), "all", util::format_double(rep.all_features_cv)});
  ref.x = {1.0, static_cast<double>(rep.sfs.names.size())};
  ref.y = {rep.all_features_cv, rep.all_features_cv};
  util::write_csv(paths.reports_dir() / "sfs.csv", t);
  util::write_csv(paths.plots_dir() / "sfs.csv", t);
  util::write_file(paths.plots_dir() / "sfs.svg",
                   util::svg_lines({"Sequential feature selection", "features", "CV MAPE [%]"},
                                   {s, ref}, false));
  return rep;
}

ExtremeReport cmd_extreme(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.reports_dir());
  std::filesystem::create_directories(paths.plots_dir());
  const auto g = load_global_full(cfg, out);
  const auto normal_pred = g.model.predict(g.corpus.test);

  ExtremeReport rep;
  rep.normal_mape = learn::mape(g.corpus.test.y, normal_pred);
  util::CsvTable t;
  t.header = {"run_id", "scenario", "mu_base", "label", "estimate", "residual", "ape_pct",
              "control_loss"};
  std::vector<util::BoxGroup> boxes;
  std::vector<double> all_y, all_p;
  double high_sum = 0;
  size_t high_n = 0;
  const auto names = summary::all_feature_names();
  for (auto sc : cfg.extreme_scenarios) {
    const std::string name(road::to_string(sc));
    const auto section = road::build_scenario(sc);
    vehsim::SamplingOptions so;
    so.perception_lo = cfg.perception_lo;
    so.perception_hi = cfg.perception_hi;
    so.mu_grid = cfg.extreme_mu_grid;
    const int n = cfg.extreme_runs_per_level * static_cast<int>(cfg.extreme_mu_grid.size());
    const auto configs = vehsim::sample_run_configs(
        section, sc, n, scenario_seed(cfg.seed ^ 0x45585452454D45ULL, sc), so);
    const auto records = simulate_records(section, configs, cfg.threads);
    util::BoxGroup box{name, {}};
    std::vector<double> y, p;
    for (const auto& rec : records) {
      if (rec.values.empty()) continue;
      summary::FeatureVector fv;
      fv.names = names;
      fv.values = rec.values;
      const double est = g.model.predict(fv);
      const double ape = 100.0 * std::abs(est - rec.label) / rec.label;
      y.push_back(rec.label);
      p.push_back(est);
      box.values.push_back(ape);
      rep.runs++;
      if (rec.control_loss) rep.control_loss_runs++;
      if (rec.config.mu_base >= 0.8 - 1e-9) {
        high_sum += est - rec.label;
        high_n++;
      }
      t.rows.push_back({rec.config.run_id, name, util::format_double(rec.config.mu_base),
                        util::format_double(rec.label), util::format_double(est),
                        util::format_double(est - rec.label), util::format_double(ape),
                        rec.control_loss ? "1" : "0"});
    }
    if (!y.empty()) rep.per_manoeuvre_mape[name] = learn::mape(y, p);
    all_y.insert(all_y.end(), y.begin(), y.end());
    all_p.insert(all_p.end(), p.begin(), p.end());
    boxes.push_back(std::move(box));
  }
  if (all_y.empty()) throw ValidationError("extreme set produced no usable runs");
  rep.extreme_mape = learn::mape(all_y, all_p);
  rep.mean_residual_high_mu = high_n ? high_sum / static_cast<double>(high_n) : 0.0;

  util::write_csv(paths.reports_dir() / "extreme.csv", t);
  util::CsvTable bt;
  bt.header = {"group", "ape_pct"};
  for (const auto& b : boxes) {
    for (double v : b.values) bt.rows.push_back({b.label, util::format_double(v)});
  }
  util::write_csv(paths.plots_dir() / "extreme_box.csv", bt);
  util::write_file(paths.plots_dir() / "extreme_box.svg",
                   util::svg_boxplot({"Extreme manoeuvres, absolute percentage error", "manoeuvre",
                                      "APE [%]"},
                                     boxes));
  json j;
  j["extreme_mape_pct"] = rep.extreme_mape;
  j["normal_mape_pct"] = rep.normal_mape;
  j["mean_residual_mu_ge_0_8"] = rep.mean_residual_high_mu;
  j["per_manoeuvre_mape_pct"] = rep.per_manoeuvre_mape;
  j["runs"] = rep.runs;
  j["control_loss_runs"] = rep.control_loss_runs;
  j["degradation_expected"] = rep.extreme_mape > rep.normal_mape;
  util::write_file(paths.reports_dir() / "extreme.json", j.dump(1));
  return rep;
}

void cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.reports_dir());
  const auto g = load_global_full(cfg, out);
  auto model = std::make_shared<const learn::TrainedRegressor>(g.model);

  json sessions = json::object();
  std::uint32_t section_id = 0;
  for (auto sc : cfg.scenarios) {
    ++section_id;
    const std::string name(road::to_string(sc));
    const auto section = road::build_scenario(sc);
    vehsim::SamplingOptions so;
    so.perception_lo = cfg.perception_lo;
    so.perception_hi = cfg.perception_hi;
    so.mu_grid = {cfg.session_mu};
    const auto configs = vehsim::sample_run_configs(
        section, sc, cfg.session_vehicles, scenario_seed(cfg.seed ^ 0x53455353494F4EULL, sc), so);
    const auto records = simulate_records(section, configs, cfg.threads);

    rsu::RsuOptions opt;
    opt.min_batch = cfg.min_batch;
    rsu::RsuNode node(section_id, section, model, opt);
    const auto advisory = rsu::encode(rsu::make_advisory(section_id, section, section.rated_speed_kmh));
    std::mt19937_64 ids(scenario_seed(cfg.link.seed, sc));
    size_t sent = 0, delivered = 0, accepted = 0;
    double label_sum = 0;
    double now = 0;
    for (size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      if (rec.values.empty()) continue;
      const std::vector<double> kin(rec.values.begin(),
                                    rec.values.begin() + summary::kKinematicFeatures);
      const auto msg = rsu::make_report(section_id, ids(), summary::KinematicSummary::unflatten(kin));
      const auto bytes = rsu::encode(msg);
      ++sent;
      const auto d = rsu::transmit(bytes, cfg.link, msg.report_id);
      now = 30.0 * static_cast<double>(i) + d.latency_ms / 1000.0;
      if (!d.delivered) continue;
      ++delivered;
      label_sum += rec.label;
      if (node.ingest(d.bytes, now).status == rsu::IngestStatus::accepted) ++accepted;
    }
    util::write_file(paths.reports_dir() / ("rsu_" + name + ".json"), node.state_json(now));
    json s;
    s["sent"] = sent;
    s["delivered"] = delivered;
    s["accepted"] = accepted;
    s["advisory_bytes"] = advisory.size();
    s["report_bytes"] = rsu::kReportBytes;
    s["true_interval"] = {0.8 * cfg.session_mu, cfg.session_mu};
    if (const auto f = node.interval()) {
      s["interval"] = {f->lower, f->upper};
      s["midpoint"] = f->midpoint;
    } else {
      s["interval"] = nullptr;
    }
    sessions[name] = std::move(s);
  }

  json rep;
  rep["config"] = cfg.to_kv();
  rep["rsu_sessions"] = sessions;
  auto attach = [&](const char* key, const std::filesystem::path& p) {
    if (std::filesystem::exists(p)) rep[key] = json::parse(util::read_file(p));
  };
  attach("evaluation", paths.reports_dir() / "evaluation.json");
  attach("extreme", paths.reports_dir() / "extreme.json");
  util::write_file(paths.root / "report.json", rep.dump(1));

  std::ostringstream md;
  md << "# Friction estimation report\n\n";
  if (rep.contains("evaluation")) {
    md << "## Held-out MAPE [%]\n\n| ablation | scenario | global | local |\n|---|---|---|---|\n";
    for (const auto& a : rep["evaluation"]["ablations"]) {
      for (const auto& s : a["scenarios"]) {
        md << "| " << a["ablation"].get<std::string>() << " | "
           << s["scenario"].get<std::string>() << " | "
           << pct(s["global_mape_pct"].get<double>()) << " | "
           << pct(s["local_mape_pct"].get<double>()) << " |\n";
      }
      md << "| " << a["ablation"].get<std::string>() << " | combined | "
         << pct(a["combined_global_mape_pct"].get<double>()) << " | |\n";
    }
    md << '\n';
  }
  md << "## RSU sessions (mu = " << util::format_double(cfg.session_mu) << ")\n\n"
     << "| scenario | delivered | accepted | interval |\n|---|---|---|---|\n";
  for (const auto& [name, s] : sessions.items()) {
    md << "| " << name << " | " << s["delivered"].get<size_t>() << " | "
       << s["accepted"].get<size_t>() << " | ";
    if (s["interval"].is_null()) {
      md << "insufficient data";
    } else {
      md << "[" << pct(s["interval"][0].get<double>()) << ", " << pct(s["interval"][1].get<double>())
         << "]";
    }
    md << " |\n";
  }
  if (rep.contains("extreme")) {
    md << "\n## Extreme manoeuvres\n\nextreme MAPE " << pct(rep["extreme"]["extreme_mape_pct"].get<double>())
       << " %, normal MAPE " << pct(rep["extreme"]["normal_mape_pct"].get<double>()) << " %\n";
  }
  util::write_file(paths.root / "report.md", md.str());
}

}  // namespace rfe::harness
