#include <algorithm>
#include <numeric>
#include <set>

#include "json.hpp"
#include "rfe/harness.h"
#include "rfe/util/csv.h"
#include "rfe/util/svg.h"

namespace rfe::harness {

using nlohmann::json;

std::string_view to_string(TrainMode m) { return m == TrainMode::local ? "local" : "global"; }

TrainMode train_mode_from_string(std::string_view s) {
  if (s == "local") return TrainMode::local;
  if (s == "global") return TrainMode::global;
  throw ValidationError("unknown training mode: " + std::string(s));
}

namespace {

std::vector<std::string> features_for(TrainMode mode, summary::Ablation a) {
  summary::FeatureSpec spec;
  spec.ablation = a;
  spec.include_road = mode == TrainMode::global;
  return summary::feature_names(spec);
}

void write_cv(const std::filesystem::path& path, const std::vector<double>& scores) {
  util::CsvTable t;
  t.header = {"fold", "mape_pct"};
  for (size_t i = 0; i < scores.size(); ++i) {
    t.rows.push_back({std::to_string(i), util::format_double(scores[i])});
  }
  util::write_csv(path, t);
}

learn::TrainedRegressor load_checked(const std::filesystem::path& path, const LoadedCorpus& lc) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("missing model " + path.string() + "; run train first");
  }
  auto reg = learn::load_model(path);
  if (reg.corpus_fingerprint != lc.fingerprint) {
    throw ValidationError("model " + path.filename().string() +
                          " was trained on a different corpus");
  }
  const std::set<std::string> trained(reg.training_runs.begin(), reg.training_runs.end());
  for (const auto& id : lc.test.run_ids) {
    if (trained.count(id)) {
      throw ValidationError("train/test leakage: " + id + " is in the held-out set of " +
                            path.filename().string());
    }
  }
  return reg;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TrainSummary cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out,
                       TrainMode mode, summary::Ablation ablation, bool run_cv) {
  cfg.validate();
  if (ablation == summary::Ablation::subset) {
    throw ValidationError("train: the subset ablation is not supported from the pipeline");
  }
  const Paths paths{out};
  std::filesystem::create_directories(paths.models_dir());
  std::filesystem::create_directories(paths.reports_dir());
  const auto features = features_for(mode, ablation);

  std::vector<std::string> scopes;
  if (mode == TrainMode::global) {
    scopes.emplace_back("combined");
  } else {
    for (auto s : cfg.scenarios) scopes.emplace_back(road::to_string(s));
  }

  TrainSummary ts;
  for (const auto& scope : scopes) {
    const auto lc = load_split(cfg, out, scope, features);
    const learn::GbtTrainer trainer(lc.train);
    auto reg = trainer.fit_all(cfg.gbt);
    reg.corpus_fingerprint = lc.fingerprint;
    const std::string model_scope = mode == TrainMode::global ? "all" : scope;
    const auto path = paths.model(to_string(mode), model_scope, ablation);
    learn::save_model(path, reg);
    ts.models.push_back(path);
    if (run_cv) {
      std::vector<size_t> feats(lc.train.cols());
      std::iota(feats.begin(), feats.end(), size_t{0});
      const auto scores =
          learn::kfold_cv(trainer, feats, cfg.gbt, {cfg.cv_folds, cfg.threads});
      write_cv(paths.reports_dir() / ("cv_" + std::string(to_string(mode)) + "_" + model_scope +
                                      "_" + std::string(summary::to_string(ablation)) + ".csv"),
               scores);
      ts.cv_scores[model_scope] = scores;
    }
  }
  return ts;
}

const AblationResult& EvaluationReport::at(summary::Ablation a) const {
  for (const auto& r : ablations) {
    if (r.ablation == a) return r;
  }
  throw std::out_of_range("no evaluation for ablation " + std::string(summary::to_string(a)));
}

std::string EvaluationReport::to_json() const {
  json j;
  j["corpus_fingerprint"] = corpus_fingerprint;
  j["seed"] = seed;
  json abl = json::array();
  for (const auto& a : ablations) {
    json sc = json::array();
    for (const auto& s : a.scenarios) {
      sc.push_back({{"scenario", s.scenario},
                    {"test_rows", s.test_rows},
                    {"global_mape_pct", s.global_mape},
                    {"local_mape_pct", s.local_mape}});
    }
    abl.push_back({{"ablation", summary::to_string(a.ablation)},
                   {"combined_global_mape_pct", a.combined_global_mape},
                   {"residual_mean", a.residual_mean},
                   {"scenarios", std::move(sc)}});
  }
  j["ablations"] = std::move(abl);
  return j.dump(1);
}

EvaluationReport cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const Paths paths{out};
  std::filesystem::create_directories(paths.reports_dir());
  std::filesystem::create_directories(paths.plots_dir());

  EvaluationReport rep;
  rep.seed = cfg.seed;
  util::CsvTable table;
  table.header = {"ablation", "scenario", "test_rows", "global_mape_pct", "local_mape_pct"};

  for (auto abl : cfg.ablations) {
    const auto gfeat = features_for(TrainMode::global, abl);
    const auto glc = load_split(cfg, out, "combined", gfeat);
    rep.corpus_fingerprint = glc.fingerprint;
    const auto greg = load_checked(paths.model("global", "all", abl), glc);
    const auto gpred = greg.predict(glc.test);

    AblationResult ar;
    ar.ablation = abl;
    ar.combined_global_mape = learn::mape(glc.test.y, gpred);
    std::vector<double> resid(gpred.size());
    for (size_t i = 0; i < gpred.size(); ++i) resid[i] = gpred[i] - glc.test.y[i];
    ar.residual_mean = mean_of(resid);

    std::map<std::string, double> local_pred_by_run;
    for (auto sc : cfg.scenarios) {
      const std::string name(road::to_string(sc));
      ScenarioScore ss;
      ss.scenario = name;
      std::vector<double> y, yg;
      for (size_t i = 0; i < glc.test.rows(); ++i) {
        if (glc.test.scenarios[i] != name) continue;
        y.push_back(glc.test.y[i]);
        yg.push_back(gpred[i]);
      }
      if (y.empty()) throw ValidationError("scenario " + name + " has no held-out rows");
      ss.test_rows = y.size();
      ss.global_mape = learn::mape(y, yg);

      const auto llc = load_split(cfg, out, name, features_for(TrainMode::local, abl));
      const auto lreg = load_checked(paths.model("local", name, abl), llc);
      const auto lpred = lreg.predict(llc.test);
      ss.local_mape = learn::mape(llc.test.y, lpred);
      for (size_t i = 0; i < lpred.size(); ++i) local_pred_by_run[llc.test.run_ids[i]] = lpred[i];
      table.rows.push_back({std::string(summary::to_string(abl)), name,
                            std::to_string(ss.test_rows), util::format_double(ss.global_mape),
                            util::format_double(ss.local_mape)});
      ar.scenarios.push_back(ss);
    }
    table.rows.push_back({std::string(summary::to_string(abl)), "combined",
                          std::to_string(glc.test.rows()),
                          util::format_double(ar.combined_global_mape), ""});

    const std::string tag(summary::to_string(abl));
    // Scatter data, residuals and absolute percentage errors; every plot has a CSV twin.
    util::CsvTable scatter;
    scatter.header = {"run_id", "scenario", "label", "global_pred", "local_pred", "residual_global",
                      "ape_global_pct", "ape_local_pct"};
    std::map<std::string, util::Series> by_scen;
    std::vector<util::BoxGroup> boxes;
    for (size_t i = 0; i < glc.test.rows(); ++i) {
      const auto& id = glc.test.run_ids[i];
      const double y = glc.test.y[i];
      const double lp = local_pred_by_run.at(id);
      scatter.rows.push_back({id, glc.test.scenarios[i], util::format_double(y),
                              util::format_double(gpred[i]), util::format_double(lp),
                              util::format_double(resid[i]),
                              util::format_double(100.0 * std::abs(gpred[i] - y) / y),
                              util::format_double(100.0 * std::abs(lp - y) / y)});
      auto& s = by_scen[glc.test.scenarios[i]];
      s.label = glc.test.scenarios[i];
      s.x.push_back(y);
      s.y.push_back(gpred[i]);
    }
    for (auto sc : cfg.scenarios) {
      const std::string name(road::to_string(sc));
      util::BoxGroup g{name + " global", {}}, l{name + " local", {}};
      for (size_t i = 0; i < glc.test.rows(); ++i) {
        if (glc.test.scenarios[i] != name) continue;
        const double y = glc.test.y[i];
        g.values.push_back(100.0 * std::abs(gpred[i] - y) / y);
        l.values.push_back(100.0 * std::abs(local_pred_by_run.at(glc.test.run_ids[i]) - y) / y);
      }
      boxes.push_back(std::move(g));
      boxes.push_back(std::move(l));
    }
    std::vector<util::Series> series;
    for (auto& [k, s] : by_scen) series.push_back(std::move(s));
    util::write_csv(paths.plots_dir() / ("scatter_" + tag + ".csv"), scatter);
    util::write_file(paths.plots_dir() / ("scatter_" + tag + ".svg"),
                     util::svg_scatter({"Estimated vs true friction (" + tag + ")", "true mu",
                                        "estimated mu"},
                                       series, true));
    util::write_file(paths.plots_dir() / ("residuals_" + tag + ".svg"),
                     util::svg_histogram({"Global residuals (" + tag + ")", "estimate - truth",
                                          "count"},
                                         resid, 30));
    util::CsvTable rt;
    rt.header = {"run_id", "residual_global"};
    for (size_t i = 0; i < resid.size(); ++i) {
      rt.rows.push_back({glc.test.run_ids[i], util::format_double(resid[i])});
    }
    util::write_csv(paths.plots_dir() / ("residuals_" + tag + ".csv"), rt);
    util::write_file(paths.plots_dir() / ("ape_box_" + tag + ".svg"),
                     util::svg_boxplot({"Absolute percentage error (" + tag + ")", "regressor",
                                        "APE [%]"},
                                       boxes));
    util::CsvTable bt;
    bt.header = {"group", "ape_pct"};
    for (const auto& g : boxes) {
      for (double v : g.values) bt.rows.push_back({g.label, util::format_double(v)});
    }
    util::write_csv(paths.plots_dir() / ("ape_box_" + tag + ".csv"), bt);

    rep.ablations.push_back(std::move(ar));
  }
  util::write_csv(paths.reports_dir() / "mape_table.csv", table);
  util::write_file(paths.reports_dir() / "evaluation.json", rep.to_json());
  return rep;
}

EvaluationReport run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  cmd_generate(cfg, out);
  for (auto abl : cfg.ablations) {
    const bool cv = abl == summary::Ablation::full;
    cmd_train(cfg, out, TrainMode::global, abl, cv);
    cmd_train(cfg, out, TrainMode::local, abl, cv);
  }
  return cmd_evaluate(cfg, out);
}

}  // namespace rfe::harness
