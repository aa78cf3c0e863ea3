#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "backhaul/oracle.hpp"
#include "backhaul/scenario.hpp"
#include "json.hpp"

namespace backhaul {

enum class Scheme { Matching, BestEffort, Random };
enum class SweepVariable { N1, BudgetPrice, K, Demand };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);
std::string_view sweep_variable_name(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view name);

/// Monte Carlo sweep description. `values` is the swept axis; for the
/// budget-price sweep `secondary_values` holds sub-6 prices, for the K sweep
/// it holds demand levels in bit/s. Zeta is in bit/s per price unit.
struct SweepConfig {
  GenerationConfig base;
  SweepVariable variable = SweepVariable::N1;
  std::vector<double> values;
  std::vector<double> secondary_values;
  int trials = 200;
  double zeta = 1e6;
  std::vector<Scheme> schemes{Scheme::Matching, Scheme::BestEffort, Scheme::Random};
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Desk-scale defaults for each experiment.
SweepConfig default_sweep_config(SweepVariable v);

nlohmann::json sweep_config_to_json(const SweepConfig& cfg);
/// Fields absent from `j` keep the defaults of `fallback`.
SweepConfig sweep_config_from_json(const nlohmann::json& j, const SweepConfig& fallback);
/// Throws InvalidConfigError listing every problem.
void validate_sweep_config(const SweepConfig& cfg);

struct SchemeMetrics {
  Scheme scheme = Scheme::Matching;
  double avg_rate_per_dbs_bps = 0.0;
  double avg_cost_per_dbs = 0.0;
  double demand_met_fraction = 0.0;
  double budget_violation_fraction = 0.0;
  double rounds = 0.0;
  double proposals = 0.0;
  double blocking_pairs = 0.0;
};

struct TrialResult {
  std::vector<SchemeMetrics> schemes;
  const SchemeMetrics* find(Scheme s) const;
};

/// Places stations, draws channels and runs every requested scheme on that
/// same realization. Streams derive from `trial_seed` only. Instances
/// without demanding stations yield all-zero metrics.
TrialResult run_trial(const GenerationConfig& params, double zeta, const std::vector<Scheme>& schemes,
                      std::uint64_t trial_seed);

struct Estimate {
  double mean = 0.0;
  double ci95 = 0.0;  // Student-t half-width; zero for a single sample
};
Estimate estimate(const std::vector<double>& samples);

struct SweepPoint {
  double value = 0.0;
  std::optional<double> secondary;
  std::vector<TrialResult> trials;
};

struct SweepRow {
  double value = 0.0;
  std::optional<double> secondary;
  Scheme scheme = Scheme::Matching;
  int trials = 0;
  Estimate rate_bps;
  Estimate cost;
  Estimate demand_met;
  Estimate budget_violation;
  Estimate rounds;
  Estimate proposals;
  Estimate blocking_pairs;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepPoint> points;
  std::vector<SweepRow> rows;

  const SweepRow* row(double value, std::optional<double> secondary, Scheme scheme) const;
};

/// Runs every (point, trial) job on a pool of `cfg.workers` threads. Trial t
/// of every point uses the same derived seed, so points are paired.
SweepResult run_sweep(const SweepConfig& cfg);
SweepResult sweep_n1(SweepConfig cfg);
SweepResult sweep_budget_price(SweepConfig cfg);
SweepResult sweep_k(SweepConfig cfg);

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path);
std::string sweep_csv(const SweepResult& r);

/// Run manifest: config, seed and library version, plus notes on defaults.
nlohmann::json make_manifest(std::string_view command, const nlohmann::json& config, std::uint64_t seed);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

struct AuditRecord {
  int trial = 0;
  std::int64_t blocking_pairs = 0;
  std::int64_t proposals = 0;
  std::int64_t proposal_bound = 0;  // K2 * K1 * (N1 + N2)
  int rounds = 0;
  std::int64_t round_bound = 0;     // K1 * (N1 + N2)
  bool budget_ok = true;            // cost <= budget exactly, every station
  bool consistent = true;
};

struct AuditSummary {
  std::vector<AuditRecord> records;
  std::int64_t total_blocking_pairs = 0;
  int trials_with_blocking_pairs = 0;
  int bound_violations = 0;
  int budget_violations = 0;
  bool passed() const {
    return total_blocking_pairs == 0 && bound_violations == 0 && budget_violations == 0;
  }
};

/// Runs the matching on `trials` independent instances and checks stability,
/// the proposal/round bounds and budgets on each.
AuditSummary stability_audit(const GenerationConfig& params, double zeta, int trials,
                             std::uint64_t seed, int workers);
void write_audit_csv(const AuditSummary& a, const std::filesystem::path& path);

/// Oracle comparison on `instances` micro instances derived from `seed`.
std::vector<OracleComparison> oracle_compare(int instances, std::uint64_t seed, double zeta,
                                             int workers = 1);

/// Runs `job(i)` for i in [0, count) on `workers` threads; rethrows the
/// first exception.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

}  // namespace backhaul
