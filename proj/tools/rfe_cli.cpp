// rfe: command line front end for corpus generation, training and evaluation.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "rfe/harness.h"

using namespace rfe;

namespace {

harness::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) {
    harness::ExperimentConfig c;
    c.validate();
    return c;
  }
  return harness::ExperimentConfig::load(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road friction estimation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value experiment config");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
  };

  auto* gen = app.add_subcommand("generate", "simulate runs and write the corpus");
  add_common(gen);

  std::string mode = "global";
  std::string ablation = "full";
  bool no_cv = false;
  auto* train = app.add_subcommand("train", "fit local or global regressors");
  add_common(train);
  train->add_option("--mode", mode, "local | global")->capture_default_str();
  train->add_option("--ablation", ablation, "full | no_sideslip | no_speed | mean_std | quantiles | skew_kurt")
      ->capture_default_str();
  train->add_flag("--no-cv", no_cv, "skip cross validation");

  auto* eval = app.add_subcommand("evaluate", "score models on the held-out split");
  add_common(eval);
  auto* sweep = app.add_subcommand("sweep-batches", "consensus error against batch size");
  add_common(sweep);
  auto* sfs = app.add_subcommand("sfs", "sequential feature selection on the combined corpus");
  add_common(sfs);
  auto* extreme = app.add_subcommand("extreme", "apply the global model to extreme manoeuvres");
  add_common(extreme);
  auto* report = app.add_subcommand("report", "RSU sessions and the consolidated report");
  add_common(report);
  auto* all = app.add_subcommand("all", "generate, train every ablation, evaluate");
  add_common(all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load_config(config_path);
    if (*gen) {
      const auto gs = harness::cmd_generate(cfg, out_dir);
      for (const auto& [name, n] : gs.rows) std::printf("%-16s %zu rows\n", name.c_str(), n);
      for (const auto& w : gs.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    } else if (*train) {
      const auto ts = harness::cmd_train(cfg, out_dir, harness::train_mode_from_string(mode),
                                         summary::ablation_from_string(ablation), !no_cv);
      for (const auto& p : ts.models) std::printf("wrote %s\n", p.string().c_str());
      for (const auto& [scope, s] : ts.cv_scores) {
        double m = 0;
        for (double v : s) m += v;
        std::printf("cv %-16s mean MAPE %.3f %%\n", scope.c_str(), m / static_cast<double>(s.size()));
      }
    } else if (*eval) {
      const auto rep = harness::cmd_evaluate(cfg, out_dir);
      for (const auto& a : rep.ablations) {
        std::printf("%-12s combined global %.3f %%\n",
                    std::string(summary::to_string(a.ablation)).c_str(), a.combined_global_mape);
        for (const auto& s : a.scenarios) {
          std::printf("  %-16s global %.3f %%  local %.3f %%\n", s.scenario.c_str(),
                      s.global_mape, s.local_mape);
        }
      }
    } else if (*sweep) {
      for (const auto& c : harness::cmd_sweep_batches(cfg, out_dir)) {
        std::printf("mu %.2f:", c.mu_base);
        for (size_t k = 0; k < c.batch_sizes.size(); ++k) {
          std::printf("  b=%zu %.2f %%", c.batch_sizes[k], c.median_error_pct[k]);
        }
        std::printf("\n");
      }
    } else if (*sfs) {
      const auto r = harness::cmd_sfs(cfg, out_dir);
      for (size_t i = 0; i < r.sfs.names.size(); ++i) {
        std::printf("%2zu %-24s %.3f %%\n", i + 1, r.sfs.names[i].c_str(), r.sfs.scores[i]);
      }
      std::printf("all features %.3f %%\n", r.all_features_cv);
    } else if (*extreme) {
      const auto r = harness::cmd_extreme(cfg, out_dir);
      std::printf("extreme MAPE %.2f %%, normal MAPE %.2f %%, mean residual mu>=0.8 %.4f\n",
                  r.extreme_mape, r.normal_mape, r.mean_residual_high_mu);
    } else if (*report) {
      harness::cmd_report(cfg, out_dir);
      std::printf("wrote %s/report.md\n", out_dir.c_str());
    } else if (*all) {
      const auto rep = harness::run_pipeline(cfg, out_dir);
      std::printf("combined global MAPE %.3f %%\n",
                  rep.at(summary::Ablation::full).combined_global_mape);
    }
  } catch (const harness::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 1;
  }
  return 0;
}
