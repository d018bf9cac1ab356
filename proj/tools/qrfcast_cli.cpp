// qrfcast: command-line front end for the post-processing pipeline.
//
//   qrfcast generate  --out DIR [--synth_config FILE] [--seed N]
//   qrfcast train     --data DIR [--origin T] [--save FILE] --out DIR
//   qrfcast forecast  --data DIR --origin T --out DIR
//   qrfcast evaluate  --data DIR [--n_scenarios N] --out DIR
//
// Every flag can also come from `--config FILE` (flat key = value, keys are the
// flag names without dashes); flags given on the command line win.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qrfcast/qrfcast.hpp"

namespace fs = std::filesystem;
using namespace qrfcast;

namespace {

struct Options {
  std::string config_file;
  std::string data_dir;
  std::string forecasts_path;
  std::string observations_path;
  std::string out_dir = ".";
  std::string synth_config;
  std::string origin;
  std::string save_path;
  std::string forest_path;
  int num_trees = 250;
  int mtry = 1;
  int min_node_size = 1;
  int sample_count = 128;
  bool replace = false;
  std::uint64_t seed = 1;
  int n_scenarios = 200;
  int train_days = 14;
  int horizon = kMaxLeadHours;
  std::size_t min_train_rows = 1000;
  double threshold = 0.0;
  int draws = 1000;
  int probe_hour = 50;
  int jobs = 1;
  bool dump_errors = false;
};

std::ofstream open_output(const fs::path &path) {
  std::error_code ec;
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void close_output(std::ofstream &out, const fs::path &path) {
  out.close();
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Dataset load_dataset(const Options &opt) {
  std::string fc = opt.forecasts_path;
  std::string obs = opt.observations_path;
  if (fc.empty() && !opt.data_dir.empty()) fc = (fs::path(opt.data_dir) / "forecasts.csv").string();
  if (obs.empty() && !opt.data_dir.empty()) obs = (fs::path(opt.data_dir) / "observations.csv").string();
  if (fc.empty() || obs.empty()) throw ConfigError("need --data DIR or both --forecasts and --observations");
  Dataset data;
  data.forecasts = rank_label_members(load_forecasts(fc));
  data.observations = load_observations(obs);
  data.site_id = fs::path(opt.data_dir.empty() ? obs : opt.data_dir).filename().string();
  return data;
}

PipelineConfig pipeline_config(const Options &opt) {
  PipelineConfig pc;
  pc.forest.num_trees = opt.num_trees;
  pc.forest.mtry = opt.mtry;
  pc.forest.min_node_size = opt.min_node_size;
  pc.forest.sample_count = opt.sample_count;
  pc.forest.replace = opt.replace;
  pc.forest.seed = opt.seed;
  pc.train_days = opt.train_days;
  pc.horizon_hours = opt.horizon;
  pc.min_training_rows = opt.min_train_rows;
  pc.jobs = opt.jobs;
  pc.forest.validate(std::numeric_limits<std::size_t>::max());
  if (pc.train_days < 1 || pc.horizon_hours < 1 || pc.horizon_hours > kMaxLeadHours) {
    throw ConfigError("train_days must be >= 1 and horizon in [1,168]");
  }
  return pc;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_generate(const Options &opt, bool seed_given) {
  SynthesisConfig cfg = SynthesisConfig::defaults();
  if (!opt.synth_config.empty()) cfg = parse_synthesis_config(text::read_key_values(opt.synth_config));
  const std::uint64_t seed = seed_given ? opt.seed : cfg.seed;
  const Dataset data = synthesize_dataset(cfg, seed);

  const fs::path out_dir(opt.out_dir);
  auto fc_path = out_dir / "forecasts.csv";
  auto obs_path = out_dir / "observations.csv";
  auto fc = open_output(fc_path);
  write_forecasts(fc, data.forecasts);
  close_output(fc, fc_path);
  auto obs = open_output(obs_path);
  write_observations(obs, data.observations);
  close_output(obs, obs_path);
  std::cerr << "wrote " << data.forecasts.size() << " forecasts and " << data.observations.size()
            << " observations to " << out_dir.string() << "\n";
  return 0;
}

int cmd_train(const Options &opt) {
  const Dataset data = load_dataset(opt);
  const PipelineConfig pc = pipeline_config(opt);

  ErrorTable table;
  if (!opt.origin.empty()) {
    table = prepare_training(data, parse_hour(opt.origin), pc).table;
  } else {
    table = build_error_table(data);
  }
  const fs::path out_dir(opt.out_dir);
  if (opt.dump_errors) {
    auto path = out_dir / "error_table.csv";
    auto out = open_output(path);
    write_error_table(out, table);
    close_output(out, path);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const Forest forest = Forest::train(table, pc.forest, opt.jobs);
  std::cerr << "trained " << pc.forest.num_trees << " trees on " << table.rows.size() << " error rows in "
            << text::format_fixed(elapsed(t0), 3) << " s (" << table.skipped_unmatched
            << " forecasts without observation skipped)\n";

  const fs::path save = opt.save_path.empty() ? out_dir / "forest.qrf" : fs::path(opt.save_path);
  auto fout = open_output(save);
  forest.save(fout);
  close_output(fout, save);

  const std::vector<double> widths(kIntervalWidths.begin(), kIntervalWidths.end());
  const auto oob = forest.oob_coverage(table, widths);
  auto path = out_dir / "oob_coverage.csv";
  auto out = open_output(path);
  out << "lead_hours,n,cov50,cov80,cov90,cov95\n";
  for (const auto &row : oob.by_lead) {
    out << row.lead_hours << ',' << row.rows;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      out << ',';
      if (auto c = row.coverage(i)) out << text::format_double(*c);
    }
    out << '\n';
  }
  close_output(out, path);
  std::cerr << "out-of-bag coverage written to " << path.string() << " (" << oob.skipped_all_in_bag
            << " rows in-bag for every tree skipped)\n";
  return 0;
}

int cmd_forecast(const Options &opt) {
  if (opt.origin.empty()) throw ConfigError("forecast needs --origin");
  if (opt.draws < 1) throw ConfigError("--draws must be >= 1");
  const Dataset data = load_dataset(opt);
  const PipelineConfig pc = pipeline_config(opt);
  const Hour origin = parse_hour(opt.origin);

  std::optional<Forest> pretrained;
  if (!opt.forest_path.empty()) {
    std::ifstream in(opt.forest_path);
    if (!in) throw ConfigError("cannot open forest file '" + opt.forest_path + "'");
    pretrained = Forest::load(in);
  }
  const auto fc = forecast_scenario(data, origin, pc, pretrained ? &*pretrained : nullptr);
  std::cerr << "origin " << format_hour(origin) << ": " << fc.training_rows << " training rows, "
            << fc.hours.size() << " forecast hours, training " << text::format_fixed(fc.timings.train_seconds, 3)
            << " s\n";

  const fs::path out_dir(opt.out_dir);
  auto q_path = out_dir / "quantiles.csv";
  auto i_path = out_dir / "intervals.csv";
  auto s_path = out_dir / "samples.csv";
  auto p_path = out_dir / "prob_below.csv";
  auto q = open_output(q_path);
  auto iv = open_output(i_path);
  auto s = open_output(s_path);
  auto p = open_output(p_path);
  q << "valid_time,level,value_degC\n";
  iv << "valid_time,lead_hours,contributing,median,lower80,upper80,lower95,upper95\n";
  s << "valid_time,lead_hours,draw,value_degC\n";
  p << "valid_time,lead_hours,threshold_degC,prob_below,prob_below_sampled\n";
  for (const auto &h : fc.hours) {
    const auto ts = format_hour(h.valid_time);
    const auto &cq = h.combined.quantiles;
    for (std::size_t k = 0; k < cq.size(); ++k) {
      q << ts << ',' << text::format_double(cq.levels[k]) << ',' << text::format_double(cq.values[k]) << '\n';
    }
    const auto &d = h.distribution;
    iv << ts << ',' << h.lead_hours << ',' << h.combined.contributing_count << ','
       << text::format_double(d.quantile(0.5)) << ',' << text::format_double(d.quantile(0.1)) << ','
       << text::format_double(d.quantile(0.9)) << ',' << text::format_double(d.quantile(0.025)) << ','
       << text::format_double(d.quantile(0.975)) << '\n';
    const std::uint64_t sample_seed = opt.seed + static_cast<std::uint64_t>(h.lead_hours);
    const auto draws = d.sample(static_cast<std::size_t>(opt.draws), sample_seed);
    std::size_t below = 0;
    for (std::size_t k = 0; k < draws.size(); ++k) {
      s << ts << ',' << h.lead_hours << ',' << k << ',' << text::format_double(draws[k]) << '\n';
      if (draws[k] < opt.threshold) ++below;
    }
    p << ts << ',' << h.lead_hours << ',' << text::format_double(opt.threshold) << ','
      << text::format_double(d.prob_below(opt.threshold)) << ','
      << text::format_double(static_cast<double>(below) / static_cast<double>(draws.size())) << '\n';

    if (h.lead_hours == opt.probe_hour) {
      auto path = out_dir / "cdf_probe.csv";
      auto probe = open_output(path);
      probe << "value_degC,cdf\n";
      const double lo = d.quantile(0.001);
      const double hi = d.quantile(0.999);
      for (int k = 0; k <= 200; ++k) {
        const double x = lo + (hi - lo) * k / 200.0;
        probe << text::format_double(x) << ',' << text::format_double(d.cdf(x)) << '\n';
      }
      close_output(probe, path);
    }
  }
  close_output(q, q_path);
  close_output(iv, i_path);
  close_output(s, s_path);
  close_output(p, p_path);
  return 0;
}

int cmd_evaluate(const Options &opt) {
  const Dataset data = load_dataset(opt);
  EvaluationConfig ec;
  ec.pipeline = pipeline_config(opt);
  ec.n_scenarios = opt.n_scenarios;
  ec.seed = opt.seed;
  ec.jobs = opt.jobs;
  if (ec.n_scenarios < 1) throw ConfigError("--n_scenarios must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const auto report = evaluate(data, ec);
  const double total_seconds = elapsed(t0);

  const fs::path out_dir(opt.out_dir);
  char name[64];
  std::size_t leakage_violations = 0;
  std::size_t skipped_unmatched = 0, skipped_unknown = 0, uncovered = 0, missing_obs = 0;
  auto origins_path = out_dir / "origins.csv";
  auto origins = open_output(origins_path);
  origins << "scenario,origin,training_rows\n";
  for (const auto &sc : report.scenarios) {
    std::snprintf(name, sizeof name, "scenario_%03zu.csv", sc.index);
    origins << sc.index << ',' << format_hour(sc.origin) << ',' << sc.training_rows << '\n';
    for (const auto &[dir, records] : {std::pair{"scores", &sc.scores}, std::pair{"nwp_scores", &sc.nwp_scores}}) {
      const auto path = out_dir / dir / name;
      auto out = open_output(path);
      write_score_header(out);
      for (const auto &r : *records) write_score_row(out, r);
      close_output(out, path);
    }
    if (!sc.leakage_free) ++leakage_violations;
    skipped_unmatched += sc.skipped_unmatched;
    skipped_unknown += sc.skipped_unknown_label;
    uncovered += sc.uncovered_hours;
    missing_obs += sc.missing_observations;
  }
  close_output(origins, origins_path);

  auto agg_path = out_dir / "aggregates.csv";
  auto agg = open_output(agg_path);
  write_aggregates(agg, report.aggregates);
  write_aggregates(agg, report.nwp_aggregates, false);
  close_output(agg, agg_path);

  const auto scores = report.all_scores();
  const auto nwp = report.all_nwp_scores();
  auto lead_mean = [](const std::vector<LeadAggregate> &aggs, const std::string &metric) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &a : aggs) {
      if (const auto *m = a.find(metric); m && m->n > 0) {
        sum += m->mean;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  };

  auto summary_path = out_dir / "summary.txt";
  auto summary = open_output(summary_path);
  summary << "n_scenarios = " << report.scenarios.size() << "\n";
  summary << "scored_hours = " << scores.size() << "\n";
  if (!scores.empty()) {
    for (double w : kIntervalWidths) {
      summary << "coverage" << static_cast<int>(std::lround(w * 100)) << " = "
              << text::format_fixed(interval_coverage(scores, w), 6) << "\n";
    }
    summary << "mae_median = " << text::format_fixed(mae_median(scores), 6) << "\n";
    summary << "nwp_mae_median = " << text::format_fixed(mae_median(nwp), 6) << "\n";
  }
  summary << "mean_crps = " << text::format_fixed(lead_mean(report.aggregates, "crps"), 6) << "\n";
  summary << "nwp_mean_crps = " << text::format_fixed(lead_mean(report.nwp_aggregates, "nwp_crps"), 6) << "\n";
  summary << "mean_log_score = " << text::format_fixed(lead_mean(report.aggregates, "log_score"), 6) << "\n";
  summary << "leakage_violations = " << leakage_violations << "\n";
  summary << "skipped_unmatched_training_rows = " << skipped_unmatched << "\n";
  summary << "skipped_unknown_label_forecasts = " << skipped_unknown << "\n";
  summary << "uncovered_hours = " << uncovered << "\n";
  summary << "missing_observations = " << missing_obs << "\n";
  for (const auto &a : report.aggregates) {
    if (const auto *m = a.find("crps")) {
      std::snprintf(name, sizeof name, "mean_crps.lead_%03d = ", a.lead_hours);
      summary << name << text::format_fixed(m->mean, 6) << "\n";
    }
  }
  close_output(summary, summary_path);

  // Wall-clock numbers live apart from the reports so those stay byte-identical.
  auto timings_path = out_dir / "timings.txt";
  auto timings = open_output(timings_path);
  double train_total = 0.0;
  for (const auto &sc : report.scenarios) train_total += sc.timings.train_seconds;
  timings << "total_seconds = " << text::format_fixed(total_seconds, 3) << "\n";
  timings << "mean_train_seconds = " << text::format_fixed(train_total / report.scenarios.size(), 4) << "\n";
  for (const auto &sc : report.scenarios) {
    timings << "scenario_" << sc.index << " = slice " << text::format_fixed(sc.timings.slice_seconds, 4) << " train "
            << text::format_fixed(sc.timings.train_seconds, 4) << " predict "
            << text::format_fixed(sc.timings.predict_seconds, 4) << "\n";
  }
  close_output(timings, timings_path);

  std::cerr << "evaluated " << report.scenarios.size() << " scenarios (" << scores.size() << " scored hours) in "
            << text::format_fixed(total_seconds, 1) << " s";
  if (!scores.empty()) std::cerr << "; 95% coverage " << text::format_fixed(interval_coverage(scores, 0.95), 4);
  std::cerr << "\n";
  return 0;
}

void add_data_options(CLI::App *cmd, Options &opt) {
  cmd->add_option("--data", opt.data_dir, "Directory holding forecasts.csv and observations.csv");
  cmd->add_option("--forecasts", opt.forecasts_path, "Forecast CSV");
  cmd->add_option("--observations", opt.observations_path, "Observation CSV");
}

void add_forest_options(CLI::App *cmd, Options &opt) {
  cmd->add_option("--num_trees", opt.num_trees, "Trees per forest")->capture_default_str();
  cmd->add_option("--mtry", opt.mtry, "Covariates tried per split")->capture_default_str();
  cmd->add_option("--min_node_size", opt.min_node_size, "Minimum rows per leaf")->capture_default_str();
  cmd->add_option("--sample_count", opt.sample_count, "Rows subsampled per tree")->capture_default_str();
  cmd->add_flag("--replace", opt.replace, "Sample rows with replacement");
  cmd->add_option("--train_days", opt.train_days, "Training window length in days")->capture_default_str();
  cmd->add_option("--horizon", opt.horizon, "Forecast horizon in hours")->capture_default_str();
  cmd->add_option("--min_train_rows", opt.min_train_rows, "Minimum error rows to train")->capture_default_str();
  cmd->add_option("--jobs", opt.jobs, "Worker threads")->capture_default_str();
}

// Expands `--config FILE` into command-line flags for keys the chosen
// subcommand understands and the user did not pass explicitly.
std::vector<std::string> expand_config(CLI::App &app, std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty() || args.empty()) return args;
  CLI::App *sub = nullptr;
  for (auto *s : app.get_subcommands({})) {
    if (s->get_name() == args.front()) sub = s;
  }
  if (!sub) return args;

  auto given = [&](const std::string &flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string &a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> injected;
  for (const auto &[key, value] : text::read_key_values(config_path)) {
    const std::string flag = "--" + key;
    bool known_elsewhere = false;
    for (auto *s : app.get_subcommands({})) {
      if (s->get_option_no_throw(flag)) known_elsewhere = true;
    }
    if (!known_elsewhere) throw ConfigError("unknown key '" + key + "' in " + config_path);
    const auto *option = sub->get_option_no_throw(flag);
    if (!option || given(flag)) continue;
    if (option->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") injected.push_back(flag);
    } else {
      injected.push_back(flag + "=" + value);
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Probabilistic post-processing of multi-model deterministic forecasts"};
  app.require_subcommand(1);
  Options opt;

  auto *generate = app.add_subcommand("generate", "Write a synthetic forecasts.csv / observations.csv pair");
  generate->add_option("--synth_config", opt.synth_config, "Synthesis key/value file");

  auto *train = app.add_subcommand("train", "Train a forest, save it and write out-of-bag coverage");
  add_data_options(train, opt);
  add_forest_options(train, opt);
  train->add_option("--origin", opt.origin, "Train on the window before this UTC hour (default: all data)");
  train->add_option("--save", opt.save_path, "Forest output file (default OUT/forest.qrf)");
  train->add_flag("--dump_errors", opt.dump_errors, "Also write the error table CSV");

  auto *forecast = app.add_subcommand("forecast", "Probabilistic forecast for one origin");
  add_data_options(forecast, opt);
  add_forest_options(forecast, opt);
  forecast->add_option("--origin", opt.origin, "Forecast origin (UTC hour)");
  forecast->add_option("--forest", opt.forest_path, "Use a saved forest instead of training");
  forecast->add_option("--threshold", opt.threshold, "Threshold for prob_below (degC)")->capture_default_str();
  forecast->add_option("--draws", opt.draws, "Samples per hour")->capture_default_str();
  forecast->add_option("--probe_hour", opt.probe_hour, "Hour ahead whose CDF is dumped")->capture_default_str();

  auto *evaluate_cmd = app.add_subcommand("evaluate", "Multi-scenario backtest with scoring");
  add_data_options(evaluate_cmd, opt);
  add_forest_options(evaluate_cmd, opt);
  evaluate_cmd->add_option("--n_scenarios", opt.n_scenarios, "Number of random origins")->capture_default_str();

  for (auto *cmd : {generate, train, forecast, evaluate_cmd}) {
    cmd->add_option("--out", opt.out_dir, "Output directory")->envname("QRFCAST_OUT_DIR")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*generate) return cmd_generate(opt, generate->count("--seed") > 0);
    if (*train) return cmd_train(opt);
    if (*forecast) return cmd_forecast(opt);
    if (*evaluate_cmd) return cmd_evaluate(opt);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
