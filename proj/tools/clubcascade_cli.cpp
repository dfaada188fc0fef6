#include "clubcascade/bounds_check.hpp"
#include "clubcascade/error.hpp"
#include "clubcascade/experiment.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace clubcascade;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBoundsFailed = 3;

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  CLI::App* app = nullptr;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  opts.app = sub;
  sub->add_option("--config", opts.config_path, "flat key=value config file");
  sub->add_option("--seed", opts.values["seed"], "seed or comma-separated seeds");
  for (const std::string& key : config_keys()) {
    sub->add_option("--" + key, opts.values[key]);
  }
}

ExperimentConfig build_config(const CommonOptions& opts, Scenario scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw Error(Errc::io_error, "cannot open config " + opts.config_path);
    apply_config_text(cfg, in);
  }
  // Flags override the file, in the fixed key order.
  for (const std::string& key : config_keys()) {
    if (opts.app->count("--" + key) > 0) apply_setting(cfg, key, opts.values.at(key));
  }
  if (opts.app->count("--seed") > 0) apply_setting(cfg, "seed", opts.values.at("seed"));
  cfg.validate();
  return cfg;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  fn(out);
  if (!out) throw Error(Errc::io_error, "write failed for " + path);
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_config:
    case Errc::parse_error:
    case Errc::empty_input:
    case Errc::too_few_users:
    case Errc::io_error:
    case Errc::infeasible_mode:
    case Errc::degenerate_pool:
    case Errc::pool_too_small:
    case Errc::delta_too_large:
    case Errc::hypothesis_violated:
    case Errc::dimension_mismatch:
      return kExitInvalid;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online clustering of cascading bandits: experiments and checks"};
  app.require_subcommand(1);

  CommonOptions synth_opts, replay_opts, features_opts, bounds_opts;
  auto* synth = app.add_subcommand("synth", "cumulative regret on synthetic clusters");
  add_common(synth, synth_opts);
  auto* replay = app.add_subcommand("replay", "cumulative clicks replayed from a ratings matrix");
  add_common(replay, replay_opts);
  auto* features = app.add_subcommand("features", "write SVD item features and id maps");
  add_common(features, features_opts);
  auto* bounds_check = app.add_subcommand("bounds-check", "empirical checks of the closed-form bounds");
  add_common(bounds_check, bounds_opts);

  std::vector<std::string> aggregate_inputs;
  std::string aggregate_out;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "mean metric over seeds per algorithm and round");
  aggregate_cmd->add_option("inputs", aggregate_inputs, "record files written by synth or replay")
      ->required();
  aggregate_cmd->add_option("--out", aggregate_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*synth) {
      const ExperimentConfig cfg = build_config(synth_opts, Scenario::synth);
      const auto cells = run_synth(cfg);
      with_output(cfg.out, [&](std::ostream& out) { write_records(out, cells); });
    } else if (*replay) {
      const ExperimentConfig cfg = build_config(replay_opts, Scenario::replay);
      const ReplayData data = prepare_replay(cfg);
      const auto cells = run_replay(cfg, data);
      with_output(cfg.out, [&](std::ostream& out) { write_records(out, cells); });
    } else if (*features) {
      const ExperimentConfig cfg = build_config(features_opts, Scenario::replay);
      const ReplayData data = prepare_replay(cfg);
      with_output(cfg.out, [&](std::ostream& out) { write_features(out, data.features.items); });
      if (!cfg.out.empty() && cfg.out != "-") {
        with_output(cfg.out + ".user_ids.csv",
                    [&](std::ostream& out) { write_id_map(out, data.ratings.user_ids); });
        with_output(cfg.out + ".item_ids.csv",
                    [&](std::ostream& out) { write_id_map(out, data.ratings.item_ids); });
      }
    } else if (*bounds_check) {
      const ExperimentConfig cfg = build_config(bounds_opts, Scenario::bounds_check);
      const auto results = bounds::run_all_checks(check_config(cfg));
      with_output(cfg.out, [&](std::ostream& out) { bounds::write_table(out, results); });
      if (!bounds::all_passed(results)) return kExitBoundsFailed;
    } else if (*aggregate_cmd) {
      std::vector<RunRecord> records;
      for (const std::string& path : aggregate_inputs) {
        std::ifstream in(path);
        if (!in) throw Error(Errc::io_error, "cannot open " + path);
        auto part = read_records(in);
        records.insert(records.end(), part.begin(), part.end());
      }
      const auto rows = aggregate(records);
      with_output(aggregate_out, [&](std::ostream& out) { write_aggregate(out, rows); });
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
