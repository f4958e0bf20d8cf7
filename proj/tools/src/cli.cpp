#include "mora_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mora_cli/instance_json.hpp"
#include "mora_cli/verify.hpp"

namespace mora::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string policy;
  std::vector<std::string> overrides;
  std::string experiment;
  std::string scale = "desk";
  std::string verify_suite;
  std::size_t instances = 1000;
  std::size_t workers = 1;
  std::optional<std::size_t> replications;
  bool confirm_long = false;
  bool self_test = false;
  std::string replay;
};

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  return fs::path(dir);
}

int do_run(const Options& o, std::ostream& out) {
  ScenarioConfig config = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
  for (const auto& kv : o.overrides) apply_override(config, kv);
  if (o.seed) config.seed = *o.seed;
  if (!o.policy.empty()) config.policy = o.policy;
  config.validate();
  const Policy policy = parse_policy(config.policy);
  const fs::path dir = prepare_out(o.out_dir);

  const MetricsRecord record = run_scenario(config, policy);
  write_csv(dir / "metrics.csv", metrics_table(record, config.num_operators));
  write_csv(dir / "summary.csv", summary_table(record, config));
  out << "policy " << config.policy << " seed " << config.seed << ": mean W " << format_number(record.mean_utility)
      << " over " << record.snapshots.size() << " snapshots, " << record.total_reassociations
      << " reassociations\n";
  return kOk;
}

int do_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), o.experiment) == names.end()) {
    throw ConfigError("unknown experiment '" + o.experiment + "'");
  }
  ExperimentOptions opts;
  if (o.scale == "desk") {
    opts.scale = Scale::desk;
  } else if (o.scale == "paper") {
    opts.scale = Scale::paper;
  } else {
    throw ConfigError("--scale must be desk or paper");
  }
  opts.seed = o.seed.value_or(1);
  opts.workers = std::max<std::size_t>(1, o.workers);
  opts.seeds = o.replications;

  const double seconds = experiment_cost_estimate(o.experiment, opts);
  if (opts.scale == Scale::paper && seconds >= 600.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "estimated single-core runtime %.1f h", seconds / 3600.0);
    if (!o.confirm_long) {
      err << o.experiment << " at paper scale: " << buf << "; rerun with --confirm-long to proceed\n";
      return kConfigError;
    }
    out << o.experiment << ": " << buf << " (divide by --workers)\n";
  }
  const fs::path dir = prepare_out(o.out_dir);
  const Table table = run_experiment(o.experiment, opts);
  const fs::path file = dir / (o.experiment + ".csv");
  write_csv(file, table);
  out << "wrote " << file.string() << " (" << table.rows.size() << " rows"
      << (table.deterministic ? "" : ", wall-clock timings") << ")\n";
  return kOk;
}

int do_verify(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(1);
  const VerifyReport report = run_verify(o.verify_suite, seed, o.instances, o.self_test);
  for (const auto& p : report.properties) {
    out << (p.violations == 0 ? "ok   " : "FAIL ") << p.name << ": " << p.checked << " instances, "
        << p.violations << " violations\n";
  }
  if (report.passed()) return kOk;
  const Counterexample& c = *report.counterexample;
  const fs::path file = prepare_out(o.out_dir) / "counterexample.json";
  std::ofstream f(file);
  f << counterexample_to_json(c);
  if (!f) throw ConfigError("cannot write " + file.string());
  out << "counterexample (" << c.property << ", instance " << c.instance << "): " << c.detail << "\n"
      << "written to " << file.string() << "\n";
  return kViolation;
}

int do_replay(const Options& o, std::ostream& out) {
  std::ifstream in(o.replay);
  if (!in) throw ConfigError("cannot read " + o.replay);
  std::stringstream text;
  text << in.rdbuf();
  const Counterexample c = counterexample_from_json(text.str());
  const auto bad = recheck(c.property, c.state, c.association);
  if (bad) {
    out << c.property << " still violated: " << *bad << "\n";
    return kViolation;
  }
  out << c.property << " holds on the stored instance\n";
  return kOk;
}

}  // namespace

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Multi-operator RAN sharing simulator"};
  app.name("mora");
  app.add_option("--config", o.config_path, "scenario file (key=value lines)");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_option("--policy", o.policy, "gllg|online|dg|glg|dg_ss|sinr_ss|brute");
  app.add_option("--set", o.overrides, "KEY=VALUE config override (repeatable)");
  app.add_option("--experiment", o.experiment, "fig1..fig9");
  app.add_option("--scale", o.scale, "desk|paper")->capture_default_str();
  app.add_option("--verify", o.verify_suite, "theorems|oracle|all");
  app.add_option("--instances", o.instances, "random instances per property")->capture_default_str();
  app.add_option("--workers", o.workers, "threads for replications")->capture_default_str();
  app.add_option("--replications", o.replications, "override an experiment's replication count");
  app.add_flag("--confirm-long", o.confirm_long, "allow paper-scale runs estimated at 10 min or more");
  app.add_flag("--self-test", o.self_test, "inject a corrupted allocation into --verify");
  app.add_option("--replay", o.replay, "recheck a counterexample.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "mora: " << e.what() << "\n";
    return kConfigError;
  }

  const int modes = !o.experiment.empty() + !o.verify_suite.empty() + !o.replay.empty();
  try {
    if (modes > 1) throw ConfigError("--experiment, --verify and --replay are mutually exclusive");
    if (o.self_test && o.verify_suite.empty()) throw ConfigError("--self-test needs --verify");
    if (!o.experiment.empty()) return do_experiment(o, out, err);
    if (!o.verify_suite.empty()) return do_verify(o, out);
    if (!o.replay.empty()) return do_replay(o, out);
    return do_run(o, out);
  } catch (const SizeError& e) {
    err << "mora: guard: " << e.what() << "\n";
    return kGuard;
  } catch (const InfeasibleError& e) {
    err << "mora: infeasible: " << e.what() << "\n";
    return kGuard;
  } catch (const NotBracketedError& e) {
    err << "mora: " << e.what() << "\n";
    return kGuard;
  } catch (const std::exception& e) {
    err << "mora: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace mora::cli
