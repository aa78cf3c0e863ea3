#include "backhaul/backhaul.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "backhaul/baselines.hpp"
#include "backhaul/errors.hpp"
#include "backhaul/experiments.hpp"
#include "backhaul/matching.hpp"
#include "backhaul/oracle.hpp"
#include "backhaul/propagation.hpp"
#include "backhaul/rng.hpp"
#include "backhaul/scenario.hpp"
#include "backhaul/version.hpp"
#include "json.hpp"

using nlohmann::json;

struct bh_scenario {
  backhaul::Scenario value;
};

struct bh_channels {
  backhaul::ChannelRealization value;
};

struct bh_matching {
  backhaul::Scenario scenario;
  backhaul::ChannelRealization channels;
  backhaul::Matching value;
};

struct bh_sweep {
  backhaul::SweepResult value;
};

namespace {

thread_local std::string last_error;

bh_status fail(bh_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body`, translating library exceptions into status codes.
template <typename F>
bh_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return BH_OK;
  } catch (const backhaul::InvalidConfigError& e) {
    return fail(BH_ERR_INVALID_CONFIG, e.what());
  } catch (const backhaul::ParseError& e) {
    return fail(BH_ERR_PARSE, e.what());
  } catch (const backhaul::IoError& e) {
    return fail(BH_ERR_IO, e.what());
  } catch (const backhaul::DomainError& e) {
    return fail(BH_ERR_DOMAIN, e.what());
  } catch (const backhaul::WrongBandError& e) {
    return fail(BH_ERR_DOMAIN, e.what());
  } catch (const backhaul::SizeError& e) {
    return fail(BH_ERR_SIZE, e.what());
  } catch (const backhaul::ConsistencyError& e) {
    return fail(BH_ERR_CONSISTENCY, e.what());
  } catch (const json::exception& e) {
    return fail(BH_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BH_ERR_INTERNAL, "unknown error");
  }
}

bh_status null_argument(const char* name) {
  return fail(BH_ERR_INVALID_ARGUMENT, std::string("argument '") + name + "' is null");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_object(const char* text, const char* what) {
  json j = json::parse(text);
  if (!j.is_object()) throw backhaul::ParseError(std::string(what) + ": expected a JSON object");
  return j;
}

backhaul::GenerationConfig generation_config(const char* params_json) {
  if (!params_json) return {};
  return backhaul::generation_config_from_json(parse_object(params_json, "scenario_params"));
}

bool valid_demanding(const backhaul::Scenario& s, int k2) { return k2 >= 0 && k2 < s.num_demanding(); }

}  // namespace

extern "C" {

const char* bh_version(void) { return backhaul::kVersion; }

const char* bh_last_error(void) { return last_error.c_str(); }

const char* bh_status_string(bh_status status) {
  switch (status) {
    case BH_OK: return "ok";
    case BH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BH_ERR_INVALID_CONFIG: return "invalid configuration";
    case BH_ERR_PARSE: return "parse error";
    case BH_ERR_IO: return "I/O error";
    case BH_ERR_DOMAIN: return "domain error";
    case BH_ERR_SIZE: return "instance too large";
    case BH_ERR_CONSISTENCY: return "inconsistent matching";
    case BH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bh_string_free(char* s) { std::free(s); }

uint64_t bh_derive_seed(uint64_t master, uint64_t index, uint64_t stream) {
  return backhaul::derive_seed(master, index, stream);
}

bh_status bh_write_manifest(const char* command, const char* config_json, uint64_t seed, const char* path) {
  if (!command) return null_argument("command");
  if (!config_json) return null_argument("config_json");
  if (!path) return null_argument("path");
  return guarded([&] {
    backhaul::write_json(backhaul::make_manifest(command, parse_object(config_json, "config"), seed), path);
  });
}

bh_status bh_scenario_generate(const char* params_json, uint64_t seed, bh_scenario** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto s = backhaul::generate_scenario(generation_config(params_json), seed);
    *out = new bh_scenario{std::move(s)};
  });
}

bh_status bh_scenario_load(const char* path, bh_scenario** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new bh_scenario{backhaul::load_scenario(path)}; });
}

bh_status bh_scenario_save(const bh_scenario* s, const char* path) {
  if (!s) return null_argument("s");
  if (!path) return null_argument("path");
  return guarded([&] { backhaul::save_scenario(s->value, path); });
}

bh_status bh_scenario_validate(const bh_scenario* s, char** report, size_t* violations) {
  if (!s) return null_argument("s");
  return guarded([&] {
    const auto problems = backhaul::validate_scenario(s->value);
    if (violations) *violations = problems.size();
    if (report) {
      std::string text;
      for (const auto& p : problems) text += p + "\n";
      *report = duplicate(text);
    }
  });
}

bh_status bh_scenario_to_json(const bh_scenario* s, char** out) {
  if (!s) return null_argument("s");
  if (!out) return null_argument("json");
  return guarded([&] { *out = duplicate(backhaul::scenario_to_json(s->value).dump(2)); });
}

int bh_scenario_num_anchors(const bh_scenario* s) { return s ? s->value.num_anchors() : 0; }

int bh_scenario_num_demanding(const bh_scenario* s) { return s ? s->value.num_demanding() : 0; }

int bh_scenario_num_brbs(const bh_scenario* s) {
  return s ? s->value.num_anchors() * s->value.num_brbs_per_anchor() : 0;
}

uint64_t bh_scenario_seed(const bh_scenario* s) { return s ? s->value.seed : 0; }

bh_status bh_scenario_demanding(const bh_scenario* s, int k2, double* demand_bps, double* budget) {
  if (!s) return null_argument("s");
  if (!valid_demanding(s->value, k2)) return fail(BH_ERR_INVALID_ARGUMENT, "demanding index out of range");
  if (demand_bps) *demand_bps = s->value.demand_bps[static_cast<std::size_t>(k2)];
  if (budget) *budget = s->value.budget[static_cast<std::size_t>(k2)];
  last_error.clear();
  return BH_OK;
}

void bh_scenario_free(bh_scenario* s) { delete s; }

bh_status bh_channels_realize(const bh_scenario* s, uint64_t seed, bh_channels** out) {
  if (!s) return null_argument("s");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    backhaul::Rng rng(seed);
    *out = new bh_channels{backhaul::realize_channels(s->value, rng)};
  });
}

bh_status bh_channels_gain(const bh_channels* ch, int k1, int n, int k2, double* gain) {
  if (!ch) return null_argument("ch");
  if (!gain) return null_argument("gain");
  const auto& c = ch->value;
  if (k1 < 0 || k1 >= c.num_anchors() || n < 0 || n >= c.num_brbs() || k2 < 0 || k2 >= c.num_demanding()) {
    return fail(BH_ERR_INVALID_ARGUMENT, "link index out of range");
  }
  *gain = c.gain(k1, n, k2);
  last_error.clear();
  return BH_OK;
}

bh_status bh_channels_write_csv(const bh_channels* ch, const char* path) {
  if (!ch) return null_argument("ch");
  if (!path) return null_argument("path");
  return guarded([&] { backhaul::write_channel_csv(ch->value, path); });
}

void bh_channels_free(bh_channels* ch) { delete ch; }

bh_status bh_allocate(const bh_scenario* s, const bh_channels* ch, bh_scheme scheme, double zeta, uint64_t seed,
                      bh_matching** out) {
  if (!s) return null_argument("s");
  if (!ch) return null_argument("ch");
  if (!out) return null_argument("out");
  *out = nullptr;
  if (scheme != BH_SCHEME_MATCHING && scheme != BH_SCHEME_BEST_EFFORT && scheme != BH_SCHEME_RANDOM) {
    return fail(BH_ERR_INVALID_ARGUMENT, "unknown scheme");
  }
  const auto& c = ch->value;
  const auto& sc = s->value;
  if (c.num_anchors() != sc.num_anchors() || c.num_demanding() != sc.num_demanding() ||
      c.num_mmw_brbs() != sc.mmw.num_brbs || c.num_brbs() != sc.num_brbs_per_anchor()) {
    return fail(BH_ERR_INVALID_ARGUMENT, "channel realization does not match the scenario");
  }
  return guarded([&] {
    const backhaul::LinkTable links(sc, c);
    backhaul::Matching m;
    switch (scheme) {
      case BH_SCHEME_MATCHING: m = backhaul::run_matching(sc, links, zeta); break;
      case BH_SCHEME_BEST_EFFORT: m = backhaul::best_effort_allocate(sc, links); break;
      case BH_SCHEME_RANDOM: {
        backhaul::Rng rng(seed);
        m = backhaul::random_allocate(sc, links, rng);
        break;
      }
    }
    *out = new bh_matching{sc, c, std::move(m)};
  });
}

bh_status bh_matching_summarize(const bh_matching* m, bh_matching_summary* out) {
  if (!m) return null_argument("m");
  if (!out) return null_argument("out");
  bh_matching_summary r{};
  const auto& v = m->value;
  r.num_demanding = static_cast<int>(v.assigned.size());
  for (std::size_t k = 0; k < v.assigned.size(); ++k) {
    r.num_assigned += static_cast<int>(v.assigned[k].size());
    r.total_rate_bps += v.rate_bps[k];
    r.total_cost += v.cost[k];
    if (v.rate_bps[k] >= m->scenario.demand_bps[k]) ++r.demand_met;
    if (v.cost[k] > m->scenario.budget[k]) ++r.budget_violations;
  }
  r.rounds = v.rounds;
  r.proposals = v.proposals;
  *out = r;
  last_error.clear();
  return BH_OK;
}

bh_status bh_matching_station(const bh_matching* m, int k2, double* rate_bps, double* cost, int* num_brbs) {
  if (!m) return null_argument("m");
  if (!valid_demanding(m->scenario, k2)) return fail(BH_ERR_INVALID_ARGUMENT, "demanding index out of range");
  const auto k = static_cast<std::size_t>(k2);
  if (rate_bps) *rate_bps = m->value.rate_bps[k];
  if (cost) *cost = m->value.cost[k];
  if (num_brbs) *num_brbs = static_cast<int>(m->value.assigned[k].size());
  last_error.clear();
  return BH_OK;
}

bh_status bh_matching_blocking_pairs(const bh_matching* m, double zeta, size_t* count) {
  if (!m) return null_argument("m");
  if (!count) return null_argument("count");
  return guarded([&] {
    *count = backhaul::find_blocking_pairs(m->value, m->scenario, m->channels, zeta).size();
  });
}

bh_status bh_matching_write_csv(const bh_matching* m, const char* path) {
  if (!m) return null_argument("m");
  if (!path) return null_argument("path");
  return guarded([&] {
    const backhaul::LinkTable links(m->scenario, m->channels);
    backhaul::write_matching_csv(m->value, m->scenario, links, path);
  });
}

void bh_matching_free(bh_matching* m) { delete m; }

bh_status bh_sweep_run(const char* kind, const char* config_json, bh_sweep** out) {
  if (!kind) return null_argument("kind");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto variable = backhaul::parse_sweep_variable(kind);
    backhaul::SweepConfig cfg = backhaul::default_sweep_config(variable);
    if (config_json) cfg = backhaul::sweep_config_from_json(parse_object(config_json, "config"), cfg);
    if (cfg.variable != variable) {
      throw backhaul::InvalidConfigError("config variable '" +
                                         std::string(backhaul::sweep_variable_name(cfg.variable)) +
                                         "' does not match sweep '" + kind + "'");
    }
    *out = new bh_sweep{backhaul::run_sweep(cfg)};
  });
}

bh_status bh_sweep_write_csv(const bh_sweep* sw, const char* path) {
  if (!sw) return null_argument("sw");
  if (!path) return null_argument("path");
  return guarded([&] { backhaul::write_sweep_csv(sw->value, path); });
}

bh_status bh_sweep_config_json(const bh_sweep* sw, char** out) {
  if (!sw) return null_argument("sw");
  if (!out) return null_argument("json");
  return guarded([&] { *out = duplicate(backhaul::sweep_config_to_json(sw->value.config).dump()); });
}

uint64_t bh_sweep_seed(const bh_sweep* sw) { return sw ? sw->value.config.seed : 0; }

size_t bh_sweep_num_rows(const bh_sweep* sw) { return sw ? sw->value.rows.size() : 0; }

void bh_sweep_free(bh_sweep* sw) { delete sw; }

bh_status bh_stability_audit(const char* params_json, double zeta, int trials, uint64_t seed, int workers,
                             const char* csv_path, bh_audit_summary* out) {
  return guarded([&] {
    const auto a = backhaul::stability_audit(generation_config(params_json), zeta, trials, seed, workers);
    if (csv_path) backhaul::write_audit_csv(a, csv_path);
    if (out) {
      out->trials = static_cast<int>(a.records.size());
      out->total_blocking_pairs = a.total_blocking_pairs;
      out->trials_with_blocking_pairs = a.trials_with_blocking_pairs;
      out->bound_violations = a.bound_violations;
      out->budget_violations = a.budget_violations;
    }
  });
}

bh_status bh_oracle_compare(int instances, uint64_t seed, double zeta, int workers, const char* csv_path,
                            bh_oracle_summary* out) {
  return guarded([&] {
    const auto rows = backhaul::oracle_compare(instances, seed, zeta, workers);
    if (csv_path) backhaul::write_oracle_csv(rows, csv_path);
    if (!out) return;
    bh_oracle_summary r{};
    r.instances = static_cast<int>(rows.size());
    double gap_sum = 0.0;
    int gaps = 0;
    for (const auto& c : rows) {
      if (c.feasible) ++r.feasible;
      if (c.matching_meets_demand) ++r.matching_met_demand;
      if (c.feasible && c.matching_meets_demand) {
        gap_sum += c.gap;
        ++gaps;
        if (c.matching_cost < c.oracle_cost) ++r.cost_order_violations;
      } else if (!c.feasible && c.matching_meets_demand && c.matching_allocation_ok) {
        ++r.cost_order_violations;  // a valid matching is itself a feasible point
      }
      if (!c.matching_allocation_ok) ++r.constraint_failures;
      if (!c.dominance_verified) ++r.dominance_failures;
    }
    r.mean_gap = gaps > 0 ? gap_sum / gaps : 0.0;
    *out = r;
  });
}

}  // extern "C"
