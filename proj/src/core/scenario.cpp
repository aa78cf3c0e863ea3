#include "backhaul/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "backhaul/errors.hpp"
#include "backhaul/rng.hpp"
#include "json_reader.hpp"

namespace backhaul {

using nlohmann::json;

namespace {

constexpr double kSpeedOfLight = 299792458.0;

const char* role_name(Role r) { return r == Role::Anchor ? "anchor" : "demanding"; }

Role parse_role(const std::string& name, const std::string& context) {
  if (name == "anchor") return Role::Anchor;
  if (name == "demanding") return Role::Demanding;
  throw ParseError(context + ": unknown role '" + name + "'");
}

json band_to_json(const Band& b) {
  return json{{"center_frequency_hz", b.center_frequency_hz},
              {"num_brbs", b.num_brbs},
              {"brb_bandwidth_hz", b.brb_bandwidth_hz}};
}

Band band_from_json(const json& j, BandKind kind, const std::string& context) {
  detail::ObjectReader r(j, context);
  Band b;
  b.kind = kind;
  b.center_frequency_hz = r.get<double>("center_frequency_hz");
  b.num_brbs = r.get<int>("num_brbs");
  b.brb_bandwidth_hz = r.get<double>("brb_bandwidth_hz");
  r.finish();
  return b;
}

}  // namespace

int Scenario::num_anchors() const {
  int n = 0;
  for (const auto& st : stations) n += st.role == Role::Anchor;
  return n;
}

int Scenario::num_demanding() const {
  return static_cast<int>(stations.size()) - num_anchors();
}

double Scenario::noise_power_w() const {
  return std::pow(10.0, (noise_power_dbm - 30.0) / 10.0);
}

std::vector<Position> Scenario::anchor_positions() const {
  std::vector<Position> out;
  for (const auto& st : stations)
    if (st.role == Role::Anchor) out.push_back(st.position);
  return out;
}

std::vector<Position> Scenario::demanding_positions() const {
  std::vector<Position> out;
  for (const auto& st : stations)
    if (st.role == Role::Demanding) out.push_back(st.position);
  return out;
}

double free_space_loss_1m_db(double frequency_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * frequency_hz / kSpeedOfLight);
}

Scenario generate_scenario(const GenerationConfig& cfg, std::uint64_t seed) {
  if (cfg.num_anchors < 1) {
    throw InvalidConfigError("num_anchors must be at least 1");
  }
  if (cfg.num_anchors >= cfg.num_stations) {
    throw InvalidConfigError("num_anchors (" + std::to_string(cfg.num_anchors) +
                             ") must be smaller than num_stations (" +
                             std::to_string(cfg.num_stations) + ")");
  }
  if (cfg.n1 < 0 || cfg.n2 < 0) {
    throw InvalidConfigError("BRB counts must be non-negative");
  }
  if (!(cfg.area_side_m > 0.0)) {
    throw InvalidConfigError("area_side_m must be positive");
  }

  Scenario s;
  s.seed = seed;
  s.area_side_m = cfg.area_side_m;
  s.tx_power_w = cfg.tx_power_w;
  s.noise_power_dbm = cfg.noise_power_dbm;
  s.mmw = Band{BandKind::MmWave, cfg.mmw_center_frequency_hz, cfg.n1, cfg.mmw_brb_bandwidth_hz};
  s.sub6 = Band{BandKind::Sub6, cfg.sub6_center_frequency_hz, cfg.n2, cfg.sub6_brb_bandwidth_hz};
  s.mmw_params = MmwParams{cfg.mmw_alpha, cfg.mmw_beta_db, cfg.mmw_sigma_db,
                           cfg.mmw_blockage_probability};
  s.sub6_params.pathloss_exponent = cfg.sub6_pathloss_exponent;
  s.sub6_params.ref_loss_db =
      cfg.sub6_ref_loss_db.value_or(free_space_loss_1m_db(cfg.sub6_center_frequency_hz));

  Rng rng(seed);
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
  s.stations.reserve(static_cast<std::size_t>(cfg.num_stations));
  for (int k = 0; k < cfg.num_stations; ++k) {
    BaseStation st;
    st.id = k;
    st.role = k < cfg.num_anchors ? Role::Anchor : Role::Demanding;
    st.position.x_m = coord(rng);
    st.position.y_m = coord(rng);
    s.stations.push_back(st);
  }

  s.prices.per_anchor.assign(static_cast<std::size_t>(cfg.num_anchors),
                             {cfg.price_mmw, cfg.price_sub6});
  const auto k2 = static_cast<std::size_t>(cfg.num_stations - cfg.num_anchors);
  s.budget.assign(k2, cfg.budget);
  s.demand_bps.assign(k2, cfg.demand_bps);
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };

  std::set<int> ids;
  for (const auto& st : s.stations) {
    if (!ids.insert(st.id).second) fail("station id " + std::to_string(st.id) + " is not unique");
    const auto& p = st.position;
    if (!(p.x_m >= 0.0 && p.x_m <= s.area_side_m && p.y_m >= 0.0 && p.y_m <= s.area_side_m)) {
      fail("station " + std::to_string(st.id) + " position lies outside the deployment square");
    }
  }
  const int k1 = s.num_anchors();
  const int k2 = s.num_demanding();
  if (k1 < 1) fail("scenario needs at least one anchor station");
  if (k2 < 1) fail("scenario needs at least one demanding station");
  if (!(s.area_side_m > 0.0)) fail("area_side_m must be positive");

  for (const Band* b : {&s.mmw, &s.sub6}) {
    const char* name = b->kind == BandKind::MmWave ? "mmw" : "sub6";
    if (b->num_brbs < 0) fail(std::string(name) + " num_brbs must be non-negative");
    if (!(b->brb_bandwidth_hz > 0.0)) fail(std::string(name) + " brb_bandwidth_hz must be positive");
    if (!(b->center_frequency_hz > 0.0)) fail(std::string(name) + " center_frequency_hz must be positive");
  }
  if (s.mmw.kind != BandKind::MmWave || s.sub6.kind != BandKind::Sub6) {
    fail("scenario needs exactly one mmW band and one sub-6 band");
  }

  if (static_cast<int>(s.prices.per_anchor.size()) != k1) {
    fail("price schedule has " + std::to_string(s.prices.per_anchor.size()) +
         " entries for " + std::to_string(k1) + " anchors");
  }
  for (std::size_t a = 0; a < s.prices.per_anchor.size(); ++a) {
    for (double p : s.prices.per_anchor[a]) {
      if (!(p >= 0.0)) fail("price of anchor " + std::to_string(a) + " is negative");
    }
  }

  if (static_cast<int>(s.budget.size()) != k2) fail("budget list length does not match demanding stations");
  if (static_cast<int>(s.demand_bps.size()) != k2) fail("demand list length does not match demanding stations");
  for (std::size_t i = 0; i < s.budget.size(); ++i) {
    if (!(s.budget[i] > 0.0)) fail("budget of demanding station " + std::to_string(i) + " must be positive");
  }
  for (std::size_t i = 0; i < s.demand_bps.size(); ++i) {
    if (!(s.demand_bps[i] > 0.0)) fail("demand of demanding station " + std::to_string(i) + " must be positive");
  }
  if (!(s.tx_power_w > 0.0)) fail("tx_power_w must be positive");
  if (!std::isfinite(s.noise_power_dbm)) fail("noise_power_dbm must be finite");

  if (!(s.mmw_params.sigma_db >= 0.0)) fail("mmw sigma_db must be non-negative");
  const double pb = s.mmw_params.blockage_probability;
  if (!(pb >= 0.0 && pb <= 1.0)) fail("mmw blockage_probability must lie in [0, 1]");
  if (!(s.sub6_params.pathloss_exponent > 0.0)) fail("sub6 pathloss_exponent must be positive");
  return out;
}

json scenario_to_json(const Scenario& s) {
  json stations = json::array();
  for (const auto& st : s.stations) {
    stations.push_back(json{{"id", st.id},
                            {"role", role_name(st.role)},
                            {"x_m", st.position.x_m},
                            {"y_m", st.position.y_m}});
  }
  json prices = json::array();
  for (const auto& p : s.prices.per_anchor) prices.push_back(json{{"mmw", p[0]}, {"sub6", p[1]}});

  return json{
      {"seed", s.seed},
      {"area_side_m", s.area_side_m},
      {"tx_power_w", s.tx_power_w},
      {"noise_power_dbm", s.noise_power_dbm},
      {"stations", stations},
      {"bands", json{{"mmw", band_to_json(s.mmw)}, {"sub6", band_to_json(s.sub6)}}},
      {"prices", prices},
      {"budget", s.budget},
      {"demand_bps", s.demand_bps},
      {"mmw_params", json{{"alpha", s.mmw_params.alpha},
                          {"beta_db", s.mmw_params.beta_db},
                          {"sigma_db", s.mmw_params.sigma_db},
                          {"blockage_probability", s.mmw_params.blockage_probability}}},
      {"sub6_params", json{{"pathloss_exponent", s.sub6_params.pathloss_exponent},
                           {"ref_loss_db", s.sub6_params.ref_loss_db}}},
  };
}

Scenario scenario_from_json(const json& j) {
  detail::ObjectReader r(j, "scenario");
  Scenario s;
  s.seed = r.get<std::uint64_t>("seed");
  s.area_side_m = r.get<double>("area_side_m");
  s.tx_power_w = r.get<double>("tx_power_w");
  s.noise_power_dbm = r.get<double>("noise_power_dbm");

  const auto& stations = r.raw("stations");
  if (!stations.is_array()) throw ParseError("scenario.stations: expected an array");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::string ctx = "scenario.stations[" + std::to_string(i) + "]";
    detail::ObjectReader sr(stations[i], ctx);
    BaseStation st;
    st.id = sr.get<int>("id");
    st.role = parse_role(sr.get<std::string>("role"), ctx);
    st.position.x_m = sr.get<double>("x_m");
    st.position.y_m = sr.get<double>("y_m");
    sr.finish();
    s.stations.push_back(st);
  }

  {
    detail::ObjectReader br(r.raw("bands"), "scenario.bands");
    s.mmw = band_from_json(br.raw("mmw"), BandKind::MmWave, "scenario.bands.mmw");
    s.sub6 = band_from_json(br.raw("sub6"), BandKind::Sub6, "scenario.bands.sub6");
    br.finish();
  }

  const auto& prices = r.raw("prices");
  if (!prices.is_array()) throw ParseError("scenario.prices: expected an array");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    detail::ObjectReader pr(prices[i], "scenario.prices[" + std::to_string(i) + "]");
    s.prices.per_anchor.push_back({pr.get<double>("mmw"), pr.get<double>("sub6")});
    pr.finish();
  }

  s.budget = r.get<std::vector<double>>("budget");
  s.demand_bps = r.get<std::vector<double>>("demand_bps");

  {
    detail::ObjectReader mr(r.raw("mmw_params"), "scenario.mmw_params");
    s.mmw_params.alpha = mr.get<double>("alpha");
    s.mmw_params.beta_db = mr.get<double>("beta_db");
    s.mmw_params.sigma_db = mr.get<double>("sigma_db");
    s.mmw_params.blockage_probability = mr.get<double>("blockage_probability");
    mr.finish();
  }
  {
    detail::ObjectReader sr(r.raw("sub6_params"), "scenario.sub6_params");
    s.sub6_params.pathloss_exponent = sr.get<double>("pathloss_exponent");
    s.sub6_params.ref_loss_db = sr.get<double>("ref_loss_db");
    sr.finish();
  }
  r.finish();
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

json generation_config_to_json(const GenerationConfig& c) {
  json j{
      {"num_stations", c.num_stations},
      {"num_anchors", c.num_anchors},
      {"n1", c.n1},
      {"n2", c.n2},
      {"mmw_brb_bandwidth_hz", c.mmw_brb_bandwidth_hz},
      {"sub6_brb_bandwidth_hz", c.sub6_brb_bandwidth_hz},
      {"mmw_center_frequency_hz", c.mmw_center_frequency_hz},
      {"sub6_center_frequency_hz", c.sub6_center_frequency_hz},
      {"tx_power_w", c.tx_power_w},
      {"noise_power_dbm", c.noise_power_dbm},
      {"demand_bps", c.demand_bps},
      {"budget", c.budget},
      {"price_mmw", c.price_mmw},
      {"price_sub6", c.price_sub6},
      {"mmw_alpha", c.mmw_alpha},
      {"mmw_beta_db", c.mmw_beta_db},
      {"mmw_sigma_db", c.mmw_sigma_db},
      {"mmw_blockage_probability", c.mmw_blockage_probability},
      {"sub6_pathloss_exponent", c.sub6_pathloss_exponent},
      {"area_side_m", c.area_side_m},
  };
  if (c.sub6_ref_loss_db) j["sub6_ref_loss_db"] = *c.sub6_ref_loss_db;
  return j;
}

GenerationConfig generation_config_from_json(const json& j) {
  detail::ObjectReader r(j, "scenario_params");
  GenerationConfig c;
  c.num_stations = r.get_or("num_stations", c.num_stations);
  c.num_anchors = r.get_or("num_anchors", c.num_anchors);
  c.n1 = r.get_or("n1", c.n1);
  c.n2 = r.get_or("n2", c.n2);
  c.mmw_brb_bandwidth_hz = r.get_or("mmw_brb_bandwidth_hz", c.mmw_brb_bandwidth_hz);
  c.sub6_brb_bandwidth_hz = r.get_or("sub6_brb_bandwidth_hz", c.sub6_brb_bandwidth_hz);
  c.mmw_center_frequency_hz = r.get_or("mmw_center_frequency_hz", c.mmw_center_frequency_hz);
  c.sub6_center_frequency_hz = r.get_or("sub6_center_frequency_hz", c.sub6_center_frequency_hz);
  c.tx_power_w = r.get_or("tx_power_w", c.tx_power_w);
  c.noise_power_dbm = r.get_or("noise_power_dbm", c.noise_power_dbm);
  c.demand_bps = r.get_or("demand_bps", c.demand_bps);
  c.budget = r.get_or("budget", c.budget);
  c.price_mmw = r.get_or("price_mmw", c.price_mmw);
  c.price_sub6 = r.get_or("price_sub6", c.price_sub6);
  c.mmw_alpha = r.get_or("mmw_alpha", c.mmw_alpha);
  c.mmw_beta_db = r.get_or("mmw_beta_db", c.mmw_beta_db);
  c.mmw_sigma_db = r.get_or("mmw_sigma_db", c.mmw_sigma_db);
  c.mmw_blockage_probability = r.get_or("mmw_blockage_probability", c.mmw_blockage_probability);
  c.sub6_pathloss_exponent = r.get_or("sub6_pathloss_exponent", c.sub6_pathloss_exponent);
  if (r.has("sub6_ref_loss_db")) c.sub6_ref_loss_db = r.get<double>("sub6_ref_loss_db");
  c.area_side_m = r.get_or("area_side_m", c.area_side_m);
  r.finish();
  return c;
}

}  // namespace backhaul
