#include "backhaul/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "backhaul/baselines.hpp"
#include "backhaul/errors.hpp"
#include "backhaul/format.hpp"
#include "backhaul/matching.hpp"
#include "backhaul/propagation.hpp"
#include "backhaul/rng.hpp"
#include "backhaul/version.hpp"
#include "json_reader.hpp"

namespace backhaul {

using nlohmann::json;

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Matching: return "matching";
    case Scheme::BestEffort: return "best_effort";
    case Scheme::Random: return "random";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "matching") return Scheme::Matching;
  if (name == "best_effort" || name == "best-effort") return Scheme::BestEffort;
  if (name == "random") return Scheme::Random;
  throw InvalidConfigError("unknown scheme '" + std::string(name) + "'");
}

std::string_view sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::N1: return "n1";
    case SweepVariable::BudgetPrice: return "budget-price";
    case SweepVariable::K: return "k";
    case SweepVariable::Demand: return "demand";
  }
  return "?";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "n1") return SweepVariable::N1;
  if (name == "budget-price") return SweepVariable::BudgetPrice;
  if (name == "k") return SweepVariable::K;
  if (name == "demand") return SweepVariable::Demand;
  throw InvalidConfigError("unknown sweep variable '" + std::string(name) + "'");
}

SweepConfig default_sweep_config(SweepVariable v) {
  SweepConfig cfg;
  cfg.variable = v;
  switch (v) {
    case SweepVariable::N1:
      cfg.values = {16, 48, 96, 144, 180};
      cfg.zeta = 1e6;
      break;
    case SweepVariable::BudgetPrice:
      for (int b = 10; b <= 100; b += 10) cfg.values.push_back(b);
      for (int p = 1; p <= 20; ++p) cfg.secondary_values.push_back(p);
      cfg.zeta = 0.1e6;
      cfg.schemes = {Scheme::Matching};
      break;
    case SweepVariable::K:
      cfg.values = {4, 8, 12, 16, 20};
      cfg.secondary_values = {50e6, 100e6};
      cfg.zeta = 1e6;
      cfg.schemes = {Scheme::Matching};
      break;
    case SweepVariable::Demand:
      cfg.values = {25e6, 50e6, 100e6, 150e6, 200e6};
      cfg.zeta = 1e6;
      break;
  }
  return cfg;
}

json sweep_config_to_json(const SweepConfig& cfg) {
  json schemes = json::array();
  for (Scheme s : cfg.schemes) schemes.push_back(std::string(scheme_name(s)));
  return json{
      {"scenario_params", generation_config_to_json(cfg.base)},
      {"variable", std::string(sweep_variable_name(cfg.variable))},
      {"values", cfg.values},
      {"secondary_values", cfg.secondary_values},
      {"trials", cfg.trials},
      {"zeta", cfg.zeta},
      {"schemes", schemes},
      {"seed", cfg.seed},
      {"workers", cfg.workers},
  };
}

SweepConfig sweep_config_from_json(const json& j, const SweepConfig& fallback) {
  detail::ObjectReader r(j, "config");
  SweepConfig cfg = fallback;
  if (r.has("scenario_params")) cfg.base = generation_config_from_json(r.raw("scenario_params"));
  if (r.has("variable")) {
    try {
      cfg.variable = parse_sweep_variable(r.get<std::string>("variable"));
    } catch (const InvalidConfigError& e) {
      throw ParseError(std::string("config.variable: ") + e.what());
    }
  }
  cfg.values = r.get_or("values", cfg.values);
  cfg.secondary_values = r.get_or("secondary_values", cfg.secondary_values);
  cfg.trials = r.get_or("trials", cfg.trials);
  cfg.zeta = r.get_or("zeta", cfg.zeta);
  if (r.has("schemes")) {
    cfg.schemes.clear();
    for (const auto& name : r.get<std::vector<std::string>>("schemes")) {
      try {
        cfg.schemes.push_back(parse_scheme(name));
      } catch (const InvalidConfigError& e) {
        throw ParseError(std::string("config.schemes: ") + e.what());
      }
    }
  }
  cfg.seed = r.get_or("seed", cfg.seed);
  cfg.workers = r.get_or("workers", cfg.workers);
  r.finish();
  return cfg;
}

namespace {

struct PointSpec {
  double value;
  std::optional<double> secondary;
};

std::vector<PointSpec> sweep_points(const SweepConfig& cfg) {
  std::vector<PointSpec> out;
  for (double v : cfg.values) {
    if (cfg.secondary_values.empty()) {
      out.push_back({v, std::nullopt});
    } else {
      for (double w : cfg.secondary_values) out.push_back({v, w});
    }
  }
  return out;
}

GenerationConfig apply_point(const SweepConfig& cfg, const PointSpec& p) {
  GenerationConfig g = cfg.base;
  switch (cfg.variable) {
    case SweepVariable::N1:
      g.n1 = static_cast<int>(std::lround(p.value));
      break;
    case SweepVariable::BudgetPrice:
      g.budget = p.value;
      if (p.secondary) g.price_sub6 = *p.secondary;
      break;
    case SweepVariable::K:
      g.num_stations = static_cast<int>(std::lround(p.value));
      if (p.secondary) g.demand_bps = *p.secondary;
      break;
    case SweepVariable::Demand:
      g.demand_bps = p.value;
      break;
  }
  return g;
}

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

void validate_sweep_config(const SweepConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.trials < 1) problems.push_back("trials must be at least 1");
  if (cfg.values.empty()) problems.push_back("sweep values must not be empty");
  if (cfg.workers < 1) problems.push_back("workers must be at least 1");
  if (!(cfg.zeta >= 0.0) || !std::isfinite(cfg.zeta)) problems.push_back("zeta must be finite and non-negative");
  if (cfg.schemes.empty()) problems.push_back("at least one scheme is required");
  if (cfg.variable == SweepVariable::BudgetPrice && cfg.secondary_values.empty()) {
    problems.push_back("budget-price sweep needs sub-6 prices in secondary_values");
  }
  if ((cfg.variable == SweepVariable::N1 || cfg.variable == SweepVariable::K)) {
    for (double v : cfg.values) {
      if (!is_integral(v) || v < 0) problems.push_back("sweep value " + format_double(v) + " must be a non-negative integer");
    }
  }
  if (problems.empty()) {
    for (const auto& p : sweep_points(cfg)) {
      const GenerationConfig g = apply_point(cfg, p);
      if (cfg.variable == SweepVariable::K && g.num_stations == g.num_anchors) continue;
      try {
        for (auto& v : validate_scenario(generate_scenario(g, 0))) {
          problems.push_back("at " + format_double(p.value) + ": " + v);
        }
      } catch (const InvalidConfigError& e) {
        problems.push_back("at " + format_double(p.value) + ": " + e.what());
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid sweep configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidConfigError(msg);
  }
}

const SchemeMetrics* TrialResult::find(Scheme s) const {
  for (const auto& m : schemes)
    if (m.scheme == s) return &m;
  return nullptr;
}

TrialResult run_trial(const GenerationConfig& params, double zeta, const std::vector<Scheme>& schemes,
                      std::uint64_t trial_seed) {
  TrialResult result;
  if (params.num_stations == params.num_anchors) {
    for (Scheme sc : schemes) result.schemes.push_back(SchemeMetrics{sc});
    return result;
  }

  const Scenario s = generate_scenario(params, derive_seed(trial_seed, 0, kPlacementStream));
  Rng channel_rng(derive_seed(trial_seed, 0, kChannelStream));
  const ChannelRealization ch = realize_channels(s, channel_rng);
  const LinkTable links(s, ch);
  const int k2n = s.num_demanding();

  for (Scheme sc : schemes) {
    Matching m;
    switch (sc) {
      case Scheme::Matching:
        m = run_matching(s, links, zeta);
        break;
      case Scheme::BestEffort:
        m = best_effort_allocate(s, links);
        break;
      case Scheme::Random: {
        Rng rng(derive_seed(trial_seed, 0, kRandomSchemeStream));
        m = random_allocate(s, links, rng);
        break;
      }
    }
    SchemeMetrics out{sc};
    for (int k = 0; k < k2n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out.avg_rate_per_dbs_bps += m.rate_bps[i];
      out.avg_cost_per_dbs += m.cost[i];
      out.demand_met_fraction += m.rate_bps[i] >= s.demand_bps[i] ? 1.0 : 0.0;
      out.budget_violation_fraction += m.cost[i] > s.budget[i] ? 1.0 : 0.0;
    }
    out.avg_rate_per_dbs_bps /= k2n;
    out.avg_cost_per_dbs /= k2n;
    out.demand_met_fraction /= k2n;
    out.budget_violation_fraction /= k2n;
    out.rounds = m.rounds;
    out.proposals = static_cast<double>(m.proposals);
    out.blocking_pairs = static_cast<double>(find_blocking_pairs(m, s, links, zeta).size());
    result.schemes.push_back(out);
  }
  return result;
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  const auto n = samples.size();
  if (n == 0) return e;
  e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  if (n < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  e.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
  return e;
}

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    const int width = std::min(workers, count);
    for (int w = 0; w < width; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

const SweepRow* SweepResult::row(double value, std::optional<double> secondary, Scheme scheme) const {
  for (const auto& r : rows)
    if (r.value == value && r.secondary == secondary && r.scheme == scheme) return &r;
  return nullptr;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  validate_sweep_config(cfg);
  const auto specs = sweep_points(cfg);
  SweepResult result;
  result.config = cfg;
  result.points.resize(specs.size());
  for (std::size_t p = 0; p < specs.size(); ++p) {
    result.points[p].value = specs[p].value;
    result.points[p].secondary = specs[p].secondary;
    result.points[p].trials.resize(static_cast<std::size_t>(cfg.trials));
  }

  const int jobs = static_cast<int>(specs.size()) * cfg.trials;
  parallel_for(jobs, cfg.workers, [&](int job) {
    const auto p = static_cast<std::size_t>(job / cfg.trials);
    const int t = job % cfg.trials;
    result.points[p].trials[static_cast<std::size_t>(t)] =
        run_trial(apply_point(cfg, specs[p]), cfg.zeta, cfg.schemes,
                  derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
  });

  for (const auto& point : result.points) {
    for (Scheme sc : cfg.schemes) {
      std::vector<double> rate, cost, met, viol, rounds, props, blocking;
      for (const auto& tr : point.trials) {
        const SchemeMetrics* m = tr.find(sc);
        rate.push_back(m->avg_rate_per_dbs_bps);
        cost.push_back(m->avg_cost_per_dbs);
        met.push_back(m->demand_met_fraction);
        viol.push_back(m->budget_violation_fraction);
        rounds.push_back(m->rounds);
        props.push_back(m->proposals);
        blocking.push_back(m->blocking_pairs);
      }
      SweepRow row;
      row.value = point.value;
      row.secondary = point.secondary;
      row.scheme = sc;
      row.trials = cfg.trials;
      row.rate_bps = estimate(rate);
      row.cost = estimate(cost);
      row.demand_met = estimate(met);
      row.budget_violation = estimate(viol);
      row.rounds = estimate(rounds);
      row.proposals = estimate(props);
      row.blocking_pairs = estimate(blocking);
      result.rows.push_back(row);
    }
  }
  return result;
}

SweepResult sweep_n1(SweepConfig cfg) {
  cfg.variable = SweepVariable::N1;
  return run_sweep(cfg);
}

SweepResult sweep_budget_price(SweepConfig cfg) {
  cfg.variable = SweepVariable::BudgetPrice;
  return run_sweep(cfg);
}

SweepResult sweep_k(SweepConfig cfg) {
  cfg.variable = SweepVariable::K;
  return run_sweep(cfg);
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  switch (r.config.variable) {
    case SweepVariable::N1: out << "n1"; break;
    case SweepVariable::BudgetPrice: out << "budget,price_sub6"; break;
    case SweepVariable::K: out << "k,demand_bps"; break;
    case SweepVariable::Demand: out << "demand_bps"; break;
  }
  const bool has_secondary = r.config.variable == SweepVariable::BudgetPrice || r.config.variable == SweepVariable::K;
  out << ",scheme,mean_rate_bps,ci95_bps,trials,mean_rate_mbps,ci95_mbps,mean_cost,ci95_cost,"
         "demand_met_fraction,ci95_demand_met,budget_violation_fraction,mean_rounds,ci95_rounds,"
         "mean_proposals,ci95_proposals,mean_blocking_pairs\n";
  for (const auto& row : r.rows) {
    out << format_double(row.value);
    if (has_secondary) {
      const double secondary = row.secondary ? *row.secondary
                               : r.config.variable == SweepVariable::K ? r.config.base.demand_bps
                                                                       : r.config.base.price_sub6;
      out << ',' << format_double(secondary);
    }
    out << ',' << scheme_name(row.scheme) << ',' << format_double(row.rate_bps.mean) << ','
        << format_double(row.rate_bps.ci95) << ',' << row.trials << ','
        << format_double(row.rate_bps.mean / 1e6) << ',' << format_double(row.rate_bps.ci95 / 1e6) << ','
        << format_double(row.cost.mean) << ',' << format_double(row.cost.ci95) << ','
        << format_double(row.demand_met.mean) << ',' << format_double(row.demand_met.ci95) << ','
        << format_double(row.budget_violation.mean) << ',' << format_double(row.rounds.mean) << ','
        << format_double(row.rounds.ci95) << ',' << format_double(row.proposals.mean) << ','
        << format_double(row.proposals.ci95) << ',' << format_double(row.blocking_pairs.mean) << '\n';
  }
  return out.str();
}

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << sweep_csv(r);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json make_manifest(std::string_view command, const json& config, std::uint64_t seed) {
  return json{
      {"tool", "backhaul-sim"},
      {"version", kVersion},
      {"command", std::string(command)},
      {"seed", seed},
      {"config", config},
      {"notes",
       json::array({"trial count default (200) is a desk-scale choice",
                    "budget-price sweep ranges (budget 10..100, sub-6 price 1..20) are this tool's choice",
                    "random baseline enforces budgets; best-effort ignores them and its cost may exceed the budget",
                    "rates are Shannon rates with log2; zeta is in bit/s per price unit"})},
  };
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

AuditSummary stability_audit(const GenerationConfig& params, double zeta, int trials,
                             std::uint64_t seed, int workers) {
  if (trials < 1) throw InvalidConfigError("trials must be at least 1");
  AuditSummary summary;
  summary.records.resize(static_cast<std::size_t>(trials));
  parallel_for(trials, workers, [&](int t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const Scenario s = generate_scenario(params, derive_seed(trial_seed, 0, kPlacementStream));
    Rng channel_rng(derive_seed(trial_seed, 0, kChannelStream));
    const ChannelRealization ch = realize_channels(s, channel_rng);
    const LinkTable links(s, ch);
    const Matching m = run_matching(s, links, zeta);

    AuditRecord rec;
    rec.trial = t;
    const std::int64_t k1 = s.num_anchors();
    const std::int64_t k2 = s.num_demanding();
    const std::int64_t n = s.num_brbs_per_anchor();
    rec.proposals = m.proposals;
    rec.proposal_bound = k2 * k1 * n;
    rec.rounds = m.rounds;
    rec.round_bound = k1 * n;
    try {
      rec.blocking_pairs = static_cast<std::int64_t>(find_blocking_pairs(m, s, links, zeta).size());
    } catch (const ConsistencyError&) {
      rec.consistent = false;
    }
    for (std::size_t i = 0; i < m.cost.size(); ++i) rec.budget_ok = rec.budget_ok && m.cost[i] <= s.budget[i];
    summary.records[static_cast<std::size_t>(t)] = rec;
  });
  for (const auto& rec : summary.records) {
    summary.total_blocking_pairs += rec.blocking_pairs;
    summary.trials_with_blocking_pairs += rec.blocking_pairs > 0 || !rec.consistent;
    summary.bound_violations += rec.proposals > rec.proposal_bound || rec.rounds > rec.round_bound;
    summary.budget_violations += !rec.budget_ok;
  }
  return summary;
}

void write_audit_csv(const AuditSummary& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "trial,blocking_pairs,proposals,proposal_bound,rounds,round_bound,budget_ok,consistent\n";
  for (const auto& r : a.records) {
    out << r.trial << ',' << r.blocking_pairs << ',' << r.proposals << ',' << r.proposal_bound << ','
        << r.rounds << ',' << r.round_bound << ',' << (r.budget_ok ? 1 : 0) << ','
        << (r.consistent ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<OracleComparison> oracle_compare(int instances, std::uint64_t seed, double zeta, int workers) {
  if (instances < 1) throw InvalidConfigError("instances must be at least 1");
  std::vector<OracleComparison> rows(static_cast<std::size_t>(instances));
  parallel_for(instances, workers, [&](int i) {
    const auto id = static_cast<std::uint64_t>(i);
    rows[static_cast<std::size_t>(i)] = compare_with_oracle(id, make_micro_instance(derive_seed(seed, id)), zeta);
  });
  return rows;
}

}  // namespace backhaul
