// backhaul-sim: command-line front end over the libbackhaul C interface.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "backhaul/backhaul.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Failure reported by the library or by config handling; exits with 1.
struct RuntimeFailure {
  std::string message;
};

void check(bh_status status, const std::string& what) {
  if (status == BH_OK) return;
  std::string msg = what + ": " + bh_status_string(status);
  const std::string detail = bh_last_error();
  if (!detail.empty()) msg += ": " + detail;
  throw RuntimeFailure{msg};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ScenarioPtr = std::unique_ptr<bh_scenario, Deleter<bh_scenario, bh_scenario_free>>;
using ChannelsPtr = std::unique_ptr<bh_channels, Deleter<bh_channels, bh_channels_free>>;
using MatchingPtr = std::unique_ptr<bh_matching, Deleter<bh_matching, bh_matching_free>>;
using SweepPtr = std::unique_ptr<bh_sweep, Deleter<bh_sweep, bh_sweep_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  bh_string_free(s);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Reads a config file. A run manifest is accepted in place of a config and
// contributes its "config" object.
json read_config(const std::optional<std::string>& path) {
  if (!path) return json::object();
  std::ifstream in(*path);
  if (!in) throw RuntimeFailure{"cannot open config '" + *path + "'"};
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw RuntimeFailure{"config '" + *path + "': " + e.what()};
  }
  if (!j.is_object()) throw RuntimeFailure{"config '" + *path + "': expected a JSON object"};
  if (j.contains("tool") && j.contains("config")) return j.at("config");
  return j;
}

void require_known_keys(const json& cfg, const std::set<std::string>& known) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (!known.count(it.key())) throw RuntimeFailure{"config: unknown field '" + it.key() + "'"};
  }
}

template <typename T>
T config_value(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw RuntimeFailure{"config: field '" + key + "' has the wrong type"};
  }
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure{"cannot create output directory '" + dir + "': " + ec.message()};
  return fs::path(dir);
}

void write_manifest(const std::string& command, const json& cfg, std::uint64_t seed, const fs::path& out) {
  const fs::path path = out / "manifest.json";
  check(bh_write_manifest(command.c_str(), cfg.dump().c_str(), seed, path.c_str()), "writing manifest");
  std::cout << "wrote " << path.string() << '\n';
}

struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_workers) {
  cmd->add_option("--config", o.config, "JSON config file or a previous run manifest")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  if (with_workers) cmd->add_option("--workers", o.workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

std::string params_dump(const json& cfg) {
  return cfg.contains("scenario_params") ? cfg.at("scenario_params").dump() : json::object().dump();
}

bh_scheme parse_scheme(const std::string& name) {
  if (name == "matching") return BH_SCHEME_MATCHING;
  if (name == "best_effort") return BH_SCHEME_BEST_EFFORT;
  if (name == "random") return BH_SCHEME_RANDOM;
  throw RuntimeFailure{"unknown scheme '" + name + "' (expected matching, best_effort or random)"};
}

int cmd_generate(const CommonOptions& o) {
  json cfg = read_config(o.config);
  require_known_keys(cfg, {"scenario_params", "seed"});
  if (o.seed) cfg["seed"] = *o.seed;
  const auto seed = config_value<std::uint64_t>(cfg, "seed", 1);
  cfg["seed"] = seed;
  if (!cfg.contains("scenario_params")) cfg["scenario_params"] = json::object();

  bh_scenario* raw = nullptr;
  check(bh_scenario_generate(params_dump(cfg).c_str(), bh_derive_seed(seed, 0, 1), &raw), "generating scenario");
  ScenarioPtr scenario(raw);
  bh_channels* ch = nullptr;
  check(bh_channels_realize(scenario.get(), bh_derive_seed(seed, 0, 2), &ch), "realizing channels");
  ChannelsPtr channels(ch);

  const fs::path out = prepare_out(o.out);
  check(bh_scenario_save(scenario.get(), (out / "scenario.json").c_str()), "saving scenario");
  check(bh_channels_write_csv(channels.get(), (out / "channels.csv").c_str()), "writing channels");
  std::cout << "wrote " << (out / "scenario.json").string() << "\nwrote " << (out / "channels.csv").string() << '\n';
  write_manifest("generate", cfg, seed, out);
  return kExitOk;
}

int cmd_run(const CommonOptions& o, const std::optional<std::string>& scenario_path,
            const std::vector<std::string>& scheme_flags, const std::optional<double>& zeta_flag) {
  json cfg = read_config(o.config);
  require_known_keys(cfg, {"scenario_params", "scenario", "schemes", "zeta", "seed"});
  if (o.seed) cfg["seed"] = *o.seed;
  if (scenario_path) {
    cfg["scenario"] = *scenario_path;
    cfg.erase("scenario_params");
  }
  if (!scheme_flags.empty()) cfg["schemes"] = scheme_flags;
  if (zeta_flag) cfg["zeta"] = *zeta_flag;
  const auto seed = config_value<std::uint64_t>(cfg, "seed", 1);
  const auto zeta = config_value<double>(cfg, "zeta", 1e6);
  const auto schemes =
      config_value<std::vector<std::string>>(cfg, "schemes", {"matching", "best_effort", "random"});
  cfg["seed"] = seed;
  cfg["zeta"] = zeta;
  cfg["schemes"] = schemes;
  if (schemes.empty()) throw RuntimeFailure{"config: schemes must not be empty"};

  bh_scenario* raw = nullptr;
  if (cfg.contains("scenario")) {
    if (cfg.contains("scenario_params")) throw RuntimeFailure{"config: give either scenario or scenario_params"};
    check(bh_scenario_load(config_value<std::string>(cfg, "scenario", "").c_str(), &raw), "loading scenario");
  } else {
    if (!cfg.contains("scenario_params")) cfg["scenario_params"] = json::object();
    check(bh_scenario_generate(params_dump(cfg).c_str(), bh_derive_seed(seed, 0, 1), &raw), "generating scenario");
  }
  ScenarioPtr scenario(raw);
  char* report = nullptr;
  std::size_t violations = 0;
  check(bh_scenario_validate(scenario.get(), &report, &violations), "validating scenario");
  const std::string problems = take_string(report);
  if (violations > 0) throw RuntimeFailure{"invalid scenario:\n" + problems};

  bh_channels* ch = nullptr;
  check(bh_channels_realize(scenario.get(), bh_derive_seed(seed, 0, 2), &ch), "realizing channels");
  ChannelsPtr channels(ch);

  const fs::path out = prepare_out(o.out);
  std::ostringstream summary;
  summary << "scheme,k2,num_brbs,rate_bps,rate_mbps,cost,budget,demand_bps,demand_met\n";
  for (const auto& name : schemes) {
    const bh_scheme scheme = parse_scheme(name);
    bh_matching* m = nullptr;
    check(bh_allocate(scenario.get(), channels.get(), scheme, zeta, bh_derive_seed(seed, 0, 3), &m), "allocating");
    MatchingPtr matching(m);
    const fs::path csv = out / ("allocation_" + name + ".csv");
    check(bh_matching_write_csv(matching.get(), csv.c_str()), "writing allocation");
    std::cout << "wrote " << csv.string() << '\n';

    bh_matching_summary s{};
    check(bh_matching_summarize(matching.get(), &s), "summarizing");
    for (int k2 = 0; k2 < s.num_demanding; ++k2) {
      double rate = 0.0, cost = 0.0, demand = 0.0, budget = 0.0;
      int brbs = 0;
      check(bh_matching_station(matching.get(), k2, &rate, &cost, &brbs), "reading allocation");
      check(bh_scenario_demanding(scenario.get(), k2, &demand, &budget), "reading scenario");
      summary << name << ',' << k2 << ',' << brbs << ',' << fmt(rate) << ',' << fmt(rate / 1e6) << ','
              << fmt(cost) << ',' << fmt(budget) << ',' << fmt(demand) << ',' << (rate >= demand ? 1 : 0) << '\n';
    }
    std::cout << name << ": " << s.demand_met << '/' << s.num_demanding << " demands met, mean rate "
              << fmt(s.num_demanding ? s.total_rate_bps / s.num_demanding / 1e6 : 0.0) << " Mbit/s, total cost "
              << fmt(s.total_cost);
    if (scheme == BH_SCHEME_MATCHING) {
      std::size_t pairs = 0;
      check(bh_matching_blocking_pairs(matching.get(), zeta, &pairs), "checking stability");
      std::cout << ", " << s.rounds << " rounds, " << pairs << " blocking pairs";
    }
    std::cout << '\n';
  }
  const fs::path summary_path = out / "summary.csv";
  std::ofstream f(summary_path, std::ios::binary);
  f << summary.str();
  if (!f) throw RuntimeFailure{"failed writing '" + summary_path.string() + "'"};
  std::cout << "wrote " << summary_path.string() << '\n';
  write_manifest("run", cfg, seed, out);
  return kExitOk;
}

int cmd_sweep(const std::string& kind, const CommonOptions& o, const std::optional<int>& trials,
              const std::optional<double>& zeta) {
  json cfg = read_config(o.config);
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.workers) cfg["workers"] = *o.workers;
  if (trials) cfg["trials"] = *trials;
  if (zeta) cfg["zeta"] = *zeta;

  bh_sweep* raw = nullptr;
  check(bh_sweep_run(kind.c_str(), cfg.dump().c_str(), &raw), "running sweep");
  SweepPtr sweep(raw);
  std::string name = kind;
  for (auto& c : name) if (c == '-') c = '_';
  const fs::path out = prepare_out(o.out);
  const fs::path csv = out / ("sweep_" + name + ".csv");
  check(bh_sweep_write_csv(sweep.get(), csv.c_str()), "writing sweep results");
  std::cout << "wrote " << csv.string() << " (" << bh_sweep_num_rows(sweep.get()) << " rows)\n";
  char* effective = nullptr;
  check(bh_sweep_config_json(sweep.get(), &effective), "reading sweep config");
  write_manifest("sweep " + kind, json::parse(take_string(effective)), bh_sweep_seed(sweep.get()), out);
  return kExitOk;
}

int cmd_oracle(const CommonOptions& o, const std::optional<int>& instances_flag, const std::optional<double>& zeta_flag) {
  json cfg = read_config(o.config);
  require_known_keys(cfg, {"instances", "seed", "zeta", "workers"});
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.workers) cfg["workers"] = *o.workers;
  if (instances_flag) cfg["instances"] = *instances_flag;
  if (zeta_flag) cfg["zeta"] = *zeta_flag;
  const auto instances = config_value<int>(cfg, "instances", 200);
  const auto seed = config_value<std::uint64_t>(cfg, "seed", 1);
  const auto zeta = config_value<double>(cfg, "zeta", 1e6);
  const auto workers = config_value<int>(cfg, "workers", 1);
  cfg = json{{"instances", instances}, {"seed", seed}, {"zeta", zeta}, {"workers", workers}};

  const fs::path out = prepare_out(o.out);
  const fs::path csv = out / "oracle.csv";
  bh_oracle_summary s{};
  check(bh_oracle_compare(instances, seed, zeta, workers, csv.c_str(), &s), "oracle comparison");
  std::cout << "instances: " << s.instances << "\nfeasible: " << s.feasible
            << "\nmatching met all demands: " << s.matching_met_demand
            << "\nmatching cheaper than optimum: " << s.cost_order_violations
            << "\nconstraint failures: " << s.constraint_failures
            << "\ndominance failures: " << s.dominance_failures << "\nmean cost gap: " << fmt(s.mean_gap)
            << "\nwrote " << csv.string() << '\n';
  write_manifest("oracle-compare", cfg, seed, out);
  const bool ok = s.cost_order_violations == 0 && s.constraint_failures == 0 && s.dominance_failures == 0;
  return ok ? kExitOk : kExitFailure;
}

int cmd_audit(const CommonOptions& o, const std::optional<int>& trials_flag, const std::optional<double>& zeta_flag) {
  json cfg = read_config(o.config);
  require_known_keys(cfg, {"scenario_params", "trials", "seed", "zeta", "workers"});
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.workers) cfg["workers"] = *o.workers;
  if (trials_flag) cfg["trials"] = *trials_flag;
  if (zeta_flag) cfg["zeta"] = *zeta_flag;
  const auto trials = config_value<int>(cfg, "trials", 1000);
  const auto seed = config_value<std::uint64_t>(cfg, "seed", 1);
  const auto zeta = config_value<double>(cfg, "zeta", 1e6);
  const auto workers = config_value<int>(cfg, "workers", 1);
  const json params = cfg.contains("scenario_params") ? cfg.at("scenario_params") : json::object();
  cfg = json{{"scenario_params", params}, {"trials", trials}, {"seed", seed}, {"zeta", zeta}, {"workers", workers}};

  const fs::path out = prepare_out(o.out);
  const fs::path csv = out / "audit.csv";
  bh_audit_summary s{};
  check(bh_stability_audit(params.dump().c_str(), zeta, trials, seed, workers, csv.c_str(), &s), "stability audit");
  std::cout << "trials: " << s.trials << "\nblocking pairs: " << s.total_blocking_pairs
            << "\ntrials with blocking pairs: " << s.trials_with_blocking_pairs
            << "\nbound violations: " << s.bound_violations << "\nbudget violations: " << s.budget_violations
            << "\nwrote " << csv.string() << '\n';
  write_manifest("stability-audit", cfg, seed, out);
  const bool ok = s.total_blocking_pairs == 0 && s.bound_violations == 0 && s.budget_violations == 0;
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backhaul resource allocation simulator for small-cell networks", "backhaul-sim"};
  app.set_version_flag("--version", std::string(bh_version()));
  app.require_subcommand(1);

  CommonOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Generate a scenario and its channel realization");
  add_common(gen, gen_opts, false);

  CommonOptions run_opts;
  std::optional<std::string> scenario_path;
  std::vector<std::string> schemes;
  std::optional<double> run_zeta;
  auto* run = app.add_subcommand("run", "Allocate BRBs on one scenario with each scheme");
  add_common(run, run_opts, false);
  run->add_option("--scenario", scenario_path, "Scenario JSON (default: generate from the config)")
      ->check(CLI::ExistingFile);
  run->add_option("--scheme", schemes, "matching, best_effort or random (repeatable)")
      ->check(CLI::IsMember({"matching", "best_effort", "random"}));
  run->add_option("--zeta", run_zeta, "Price weight in bit/s per price unit");

  CommonOptions sweep_opts;
  std::string sweep_kind;
  std::optional<int> sweep_trials;
  std::optional<double> sweep_zeta;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over N1, budget x price, or K");
  sweep->add_option("kind", sweep_kind, "n1, budget-price or k")
      ->required()
      ->check(CLI::IsMember({"n1", "budget-price", "k", "demand"}));
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--trials", sweep_trials, "Trials per sweep point")->check(CLI::PositiveNumber);
  sweep->add_option("--zeta", sweep_zeta, "Price weight in bit/s per price unit");

  CommonOptions oracle_opts;
  std::optional<int> instances;
  std::optional<double> oracle_zeta;
  auto* oracle = app.add_subcommand("oracle-compare", "Compare the matching with the exhaustive optimum");
  add_common(oracle, oracle_opts, true);
  oracle->add_option("--instances", instances, "Number of micro instances")->check(CLI::PositiveNumber);
  oracle->add_option("--zeta", oracle_zeta, "Price weight in bit/s per price unit");

  CommonOptions audit_opts;
  std::optional<int> audit_trials;
  std::optional<double> audit_zeta;
  auto* audit = app.add_subcommand("stability-audit", "Check matching stability, bounds and budgets");
  add_common(audit, audit_opts, true);
  audit->add_option("--trials", audit_trials, "Number of trials")->check(CLI::PositiveNumber);
  audit->add_option("--zeta", audit_zeta, "Price weight in bit/s per price unit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_opts);
    if (*run) return cmd_run(run_opts, scenario_path, schemes, run_zeta);
    if (*sweep) return cmd_sweep(sweep_kind, sweep_opts, sweep_trials, sweep_zeta);
    if (*oracle) return cmd_oracle(oracle_opts, instances, oracle_zeta);
    if (*audit) return cmd_audit(audit_opts, audit_trials, audit_zeta);
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.message << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
