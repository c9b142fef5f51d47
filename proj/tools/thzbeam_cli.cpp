#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thzbeam/errors.hpp"
#include "thzbeam/experiment.hpp"
#include "thzbeam/selftest.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitDomain = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct CommandArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string axis;
  std::string values;
  // Stable storage for the auto-generated per-key flags; std::map nodes do
  // not move, so CLI11 can hold references into it.
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommandArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "key=value configuration file");
  for (const std::string& key : thzbeam::ExperimentConfig::keys())
    cmd->add_option("--" + key, args.overrides[key],
                    "override config key " + key);
}

thzbeam::ExperimentConfig build_config(const CLI::App* cmd,
                                       const CommandArgs& args) {
  thzbeam::ExperimentConfig config;
  if (!args.config_path.empty())
    config = thzbeam::load_config_file(args.config_path);
  for (const std::string& key : thzbeam::ExperimentConfig::keys())
    if (cmd->count("--" + key) > 0) config.set(key, args.overrides.at(key));
  return config;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("sweep: bad axis value: " + item);
    }
  }
  if (out.empty()) throw std::invalid_argument("sweep: no axis values given");
  return out;
}

void print_summary(const thzbeam::MonteCarloResult& mc) {
  std::cout << "runs=" << mc.runs.size()
            << " mean_tp=" << thzbeam::format_double(mc.mean_tp)
            << " median_tp=" << thzbeam::format_double(mc.median_tp)
            << " std_tp=" << thzbeam::format_double(mc.std_tp)
            << " bytes_uploaded=" << thzbeam::format_double(mc.mean_bytes)
            << "\n";
}

int do_run(const CLI::App* cmd, const CommandArgs& args, bool baseline_only) {
  thzbeam::ExperimentConfig config = build_config(cmd, args);
  if (baseline_only) {
    if (cmd->count("--method") == 0) config.method = thzbeam::Method::Zf;
    if (thzbeam::is_learning_method(config.method))
      throw std::invalid_argument(
          "baseline: method must be one of zf, mmse, mrt, random");
  }
  config.validate();
  std::filesystem::create_directories(args.out_dir);

  const bool write_checkpoints =
      config.monte_carlo_runs == 1 && (config.method == thzbeam::Method::Fdrl ||
                                       config.method == thzbeam::Method::DdpgLocal);
  const thzbeam::MonteCarloResult mc =
      thzbeam::run_monte_carlo(config, write_checkpoints ? args.out_dir : "");

  thzbeam::write_trace_csv(args.out_dir + "/trace.csv", mc.runs);
  thzbeam::write_summary_csv(
      args.out_dir + "/summary.csv",
      {{0.0, mc.mean_tp, mc.median_tp, mc.std_tp, mc.mean_bytes}});
  print_summary(mc);
  return 0;
}

int do_sweep(const CLI::App* cmd, const CommandArgs& args) {
  thzbeam::ExperimentConfig config = build_config(cmd, args);
  config.validate();
  thzbeam::SweepAxis axis;
  axis.kind = thzbeam::parse_axis(args.axis);
  axis.values = parse_value_list(args.values);

  std::filesystem::create_directories(args.out_dir);
  const std::vector<thzbeam::SweepRow> rows = thzbeam::sweep(config, axis);
  thzbeam::write_summary_csv(args.out_dir + "/summary.csv", rows);
  for (const thzbeam::SweepRow& row : rows)
    std::cout << thzbeam::axis_name(axis.kind) << "="
              << thzbeam::format_double(row.axis_value)
              << " mean_tp=" << thzbeam::format_double(row.mean_tp)
              << " median_tp=" << thzbeam::format_double(row.median_tp)
              << " std_tp=" << thzbeam::format_double(row.std_tp)
              << " bytes_uploaded=" << thzbeam::format_double(row.bytes_uploaded)
              << "\n";
  return 0;
}

int do_check(const CLI::App* cmd, const CommandArgs& args) {
  const thzbeam::ExperimentConfig config = build_config(cmd, args);
  const thzbeam::oracle::CheckReport report =
      thzbeam::oracle::run_self_checks(config.seed);
  for (const std::string& line : report.messages) std::cout << line << "\n";
  std::cout << "self-checks: " << report.passed << " passed, " << report.failed
            << " failed\n";
  if (!report.all_passed()) {
    std::cerr << "error category=internal: self-checks failed\n";
    return kExitInternal;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell THz downlink beamforming: link simulator, "
               "per-BS DDPG agents with federated averaging, and classical "
               "baselines"};
  app.require_subcommand(1);

  CommandArgs run_args, sweep_args, baseline_args, check_args;

  CLI::App* run_cmd = app.add_subcommand(
      "run", "Monte Carlo batch of one configuration; emits trace and "
             "summary CSV");
  run_cmd->add_option("--out", run_args.out_dir, "output directory");
  add_config_flags(run_cmd, run_args);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "one Monte Carlo batch per axis value with paired seeds");
  sweep_cmd->add_option("--out", sweep_args.out_dir, "output directory");
  sweep_cmd->add_option("--axis", sweep_args.axis,
                        "antennas|cells|neurons|upload_ratio|distance")
      ->required();
  sweep_cmd->add_option("--values", sweep_args.values,
                        "comma-separated axis values")
      ->required();
  add_config_flags(sweep_cmd, sweep_args);

  CLI::App* baseline_cmd = app.add_subcommand(
      "baseline", "non-learning reference methods (zf, mmse, mrt, random)");
  baseline_cmd->add_option("--out", baseline_args.out_dir, "output directory");
  add_config_flags(baseline_cmd, baseline_args);

  CLI::App* check_cmd =
      app.add_subcommand("check", "built-in gradient and oracle self-tests");
  add_config_flags(check_cmd, check_args);

  int rc = 0;
  run_cmd->callback([&] { rc = do_run(run_cmd, run_args, false); });
  sweep_cmd->callback([&] { rc = do_sweep(sweep_cmd, sweep_args); });
  baseline_cmd->callback([&] { rc = do_run(baseline_cmd, baseline_args, true); });
  check_cmd->callback([&] { rc = do_check(check_cmd, check_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error category=config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const thzbeam::IoError& e) {
    std::cerr << "error category=io: " << e.what() << "\n";
    return kExitIo;
  } catch (const thzbeam::ProtocolError& e) {
    std::cerr << "error category=io: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error category=config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error category=domain: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error category=internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return rc;
}
