#include "slicing/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace slicing {

std::size_t Scenario::slice_index(std::string_view id) const {
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (slices[i].id == id) return i;
  }
  throw std::out_of_range("unknown slice id '" + std::string(id) + "'");
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string at(std::string_view prefix, std::size_t i, std::string_view field) {
  std::ostringstream os;
  os << prefix << '[' << i << "]." << field;
  return os.str();
}

int max_count_of(const Scenario& scn, std::size_t slice) {
  int n = scn.slices[slice].initial_users;
  for (const auto& ev : scn.events) {
    if (ev.slice == scn.slices[slice].id) n = std::max(n, ev.user_count);
  }
  return n;
}

}  // namespace

void validate(const Scenario& scn) {
  const auto& phy = scn.phy;
  require(positive(phy.total_bandwidth_hz), "phy.total_bandwidth_hz", "must be > 0");
  require(phy.num_prbs >= 1, "phy.num_prbs", "must be >= 1");
  require(std::isfinite(phy.noise_psd_dbm_hz), "phy.noise_psd_dbm_hz", "must be finite");
  require(positive(phy.carrier_freq_hz), "phy.carrier_freq_hz", "must be > 0");
  require(std::isfinite(phy.pathloss_exponent) && phy.pathloss_exponent >= 2.0,
          "phy.pathloss_exponent", "must be >= 2");
  require(positive(phy.cell_radius_m) && phy.cell_radius_m > kMinUserDistanceM,
          "phy.cell_radius_m", "must exceed the 35 m placement floor");

  require(scn.horizon_slots >= 1, "simulation.horizon_slots", "must be >= 1");
  require(positive(scn.slot_duration_s), "simulation.slot_duration_s", "must be > 0");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < scn.slices.size(); ++i) {
    const auto& s = scn.slices[i];
    require(!s.id.empty(), at("slices", i, "id"), "must not be empty");
    require(ids.insert(s.id).second, at("slices", i, "id"), "duplicate slice id '" + s.id + "'");
    require(s.initial_users >= 0, at("slices", i, "users"), "must be >= 0");
    if (s.is_self_managed()) {
      const auto& sm = s.self_managed();
      require(positive(sm.capacity_bps), at("slices", i, "capacity_bps"), "must be > 0");
      require(positive(sm.per_user_demand_bps), at("slices", i, "per_user_demand_bps"),
              "must be > 0");
    } else {
      const auto& r = s.rll();
      require(positive(r.d_max_s), at("slices", i, "d_max_s"), "must be > 0");
      require(std::isfinite(r.reliability) && r.reliability > 0.0 && r.reliability < 1.0,
              at("slices", i, "reliability"), "must lie in (0, 1)");
      require(positive(r.arrival_bps), at("slices", i, "arrival_bps"), "must be > 0");
      require(positive(r.mean_packet_bits), at("slices", i, "mean_packet_bits"), "must be > 0");
      require(r.max_users >= 1, at("slices", i, "max_users"), "must be >= 1");
    }
  }

  int prev_slot = -1;
  for (std::size_t i = 0; i < scn.events.size(); ++i) {
    const auto& ev = scn.events[i];
    require(ev.slot > prev_slot, at("events", i, "slot"), "slot indices must be strictly increasing");
    require(ev.slot >= 0, at("events", i, "slot"), "must be >= 0");
    require(ids.contains(ev.slice), at("events", i, "slice"), "unknown slice '" + ev.slice + "'");
    require(ev.user_count >= 0, at("events", i, "users"), "must be >= 0");
    prev_slot = ev.slot;
  }

  std::vector<int> per_slice(scn.slices.size(), 0);
  for (std::size_t i = 0; i < scn.users.size(); ++i) {
    const auto& u = scn.users[i];
    require(u.slice < scn.slices.size(), at("users", i, "slice"), "unknown slice");
    require(std::isfinite(u.distance_m) && u.distance_m > 0.0 &&
                u.distance_m <= phy.cell_radius_m,
            at("users", i, "distance_m"), "must lie in (0, cell_radius_m]");
    require(i == 0 || scn.users[i - 1].id < u.id, at("users", i, "id"),
            "user ids must be strictly increasing");
    ++per_slice[u.slice];
  }
  for (std::size_t s = 0; s < scn.slices.size(); ++s) {
    require(per_slice[s] >= max_count_of(scn, s), at("slices", s, "users"),
            "fewer placed users than the slice ever activates");
  }
}

std::vector<UserState> place_users(const Scenario& scn) {
  auto rng = make_stream(scn.rng_seed, StreamPurpose::Placement);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = kMinUserDistanceM;
  const double hi = scn.phy.cell_radius_m;
  std::vector<UserState> users;
  int next_id = 0;
  for (std::size_t s = 0; s < scn.slices.size(); ++s) {
    const int n = max_count_of(scn, s);
    for (int k = 0; k < n; ++k) {
      // 1 - U lies in (0, 1], so distances land in (lo, hi].
      const double d = lo + (hi - lo) * (1.0 - unit(rng));
      users.push_back(UserState{UserId{next_id++}, s, d});
    }
  }
  return users;
}

// ---------------------------------------------------------------------------
// YAML mapping

namespace {

const std::set<std::string> kTopLevelKeys = {"phy",   "simulation", "slices",    "events",
                                             "users", "controller", "engine"};

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!node.IsMap()) throw ConfigParseError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigParseError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigParseError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T read_required(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw ConfigParseError(where + "." + key + ": required key missing");
  T out{};
  read(node, key, out, where);
  return out;
}

}  // namespace

Scenario parse_scenario(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigParseError(std::string("malformed config: ") + e.what());
  }
  Scenario scn;
  if (root.IsNull()) {
    validate(scn);
    return scn;
  }
  check_keys(root, kTopLevelKeys, "config");

  if (const auto phy = root["phy"]) {
    check_keys(phy,
               {"total_bandwidth_hz", "num_prbs", "noise_psd_dbm_hz", "carrier_freq_hz",
                "pathloss_exponent", "cell_radius_m"},
               "phy");
    read(phy, "total_bandwidth_hz", scn.phy.total_bandwidth_hz, "phy");
    read(phy, "num_prbs", scn.phy.num_prbs, "phy");
    read(phy, "noise_psd_dbm_hz", scn.phy.noise_psd_dbm_hz, "phy");
    read(phy, "carrier_freq_hz", scn.phy.carrier_freq_hz, "phy");
    read(phy, "pathloss_exponent", scn.phy.pathloss_exponent, "phy");
    read(phy, "cell_radius_m", scn.phy.cell_radius_m, "phy");
  }

  if (const auto sim = root["simulation"]) {
    check_keys(sim, {"horizon_slots", "slot_duration_s", "rng_seed"}, "simulation");
    read(sim, "horizon_slots", scn.horizon_slots, "simulation");
    read(sim, "slot_duration_s", scn.slot_duration_s, "simulation");
    read(sim, "rng_seed", scn.rng_seed, "simulation");
  }

  if (const auto slices = root["slices"]) {
    if (!slices.IsSequence()) throw ConfigParseError("slices: expected a list");
    for (std::size_t i = 0; i < slices.size(); ++i) {
      const auto& n = slices[i];
      const std::string where = "slices[" + std::to_string(i) + "]";
      SliceSpec spec;
      const auto kind = read_required<std::string>(n, "kind", where);
      if (kind == "self_managed") {
        check_keys(n, {"id", "kind", "users", "capacity_bps", "per_user_demand_bps"}, where);
        SelfManaged sm;
        sm.capacity_bps = read_required<double>(n, "capacity_bps", where);
        read(n, "per_user_demand_bps", sm.per_user_demand_bps, where);
        spec.kind = sm;
      } else if (kind == "rll") {
        check_keys(n,
                   {"id", "kind", "users", "d_max_s", "reliability", "arrival_bps",
                    "mean_packet_bits", "max_users"},
                   where);
        Rll r;
        r.d_max_s = read_required<double>(n, "d_max_s", where);
        r.reliability = read_required<double>(n, "reliability", where);
        r.arrival_bps = read_required<double>(n, "arrival_bps", where);
        r.mean_packet_bits = read_required<double>(n, "mean_packet_bits", where);
        r.max_users = read_required<int>(n, "max_users", where);
        spec.kind = r;
      } else {
        throw ConfigParseError(where + ".kind: expected 'self_managed' or 'rll', got '" + kind +
                               "'");
      }
      spec.id = read_required<std::string>(n, "id", where);
      read(n, "users", spec.initial_users, where);
      scn.slices.push_back(std::move(spec));
    }
  }

  if (const auto events = root["events"]) {
    if (!events.IsSequence()) throw ConfigParseError("events: expected a list");
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& n = events[i];
      const std::string where = "events[" + std::to_string(i) + "]";
      check_keys(n, {"slot", "slice", "users"}, where);
      scn.events.push_back(Event{read_required<int>(n, "slot", where),
                                 read_required<std::string>(n, "slice", where),
                                 read_required<int>(n, "users", where)});
    }
  }

  if (const auto users = root["users"]) {
    if (!users.IsSequence()) throw ConfigParseError("users: expected a list");
    for (std::size_t i = 0; i < users.size(); ++i) {
      const auto& n = users[i];
      const std::string where = "users[" + std::to_string(i) + "]";
      check_keys(n, {"id", "slice", "distance_m"}, where);
      const auto slice = read_required<std::string>(n, "slice", where);
      std::size_t idx = 0;
      try {
        idx = scn.slice_index(slice);
      } catch (const std::out_of_range&) {
        throw ValidationError(where + ".slice", "unknown slice '" + slice + "'");
      }
      scn.users.push_back(UserState{UserId{read_required<int>(n, "id", where)}, idx,
                                    read_required<double>(n, "distance_m", where)});
    }
  } else {
    // Placement needs a structurally sane scenario first.
    Scenario probe = scn;
    probe.users.clear();
    for (std::size_t s = 0; s < probe.slices.size(); ++s) probe.slices[s].initial_users = 0;
    probe.events.clear();
    validate(probe);
    scn.users = place_users(scn);
  }

  validate(scn);
  return scn;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& scn) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "phy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "total_bandwidth_hz" << YAML::Value << scn.phy.total_bandwidth_hz;
  out << YAML::Key << "num_prbs" << YAML::Value << scn.phy.num_prbs;
  out << YAML::Key << "noise_psd_dbm_hz" << YAML::Value << scn.phy.noise_psd_dbm_hz;
  out << YAML::Key << "carrier_freq_hz" << YAML::Value << scn.phy.carrier_freq_hz;
  out << YAML::Key << "pathloss_exponent" << YAML::Value << scn.phy.pathloss_exponent;
  out << YAML::Key << "cell_radius_m" << YAML::Value << scn.phy.cell_radius_m;
  out << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon_slots" << YAML::Value << scn.horizon_slots;
  out << YAML::Key << "slot_duration_s" << YAML::Value << scn.slot_duration_s;
  out << YAML::Key << "rng_seed" << YAML::Value << scn.rng_seed;
  out << YAML::EndMap;

  out << YAML::Key << "slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : scn.slices) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << s.id;
    out << YAML::Key << "users" << YAML::Value << s.initial_users;
    if (s.is_self_managed()) {
      const auto& sm = s.self_managed();
      out << YAML::Key << "kind" << YAML::Value << "self_managed";
      out << YAML::Key << "capacity_bps" << YAML::Value << sm.capacity_bps;
      out << YAML::Key << "per_user_demand_bps" << YAML::Value << sm.per_user_demand_bps;
    } else {
      const auto& r = s.rll();
      out << YAML::Key << "kind" << YAML::Value << "rll";
      out << YAML::Key << "d_max_s" << YAML::Value << r.d_max_s;
      out << YAML::Key << "reliability" << YAML::Value << r.reliability;
      out << YAML::Key << "arrival_bps" << YAML::Value << r.arrival_bps;
      out << YAML::Key << "mean_packet_bits" << YAML::Value << r.mean_packet_bits;
      out << YAML::Key << "max_users" << YAML::Value << r.max_users;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& ev : scn.events) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "slot" << YAML::Value << ev.slot;
    out << YAML::Key << "slice" << YAML::Value << ev.slice;
    out << YAML::Key << "users" << YAML::Value << ev.user_count;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "users" << YAML::Value << YAML::BeginSeq;
  for (const auto& u : scn.users) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << u.id.value;
    out << YAML::Key << "slice" << YAML::Value << scn.slices[u.slice].id;
    out << YAML::Key << "distance_m" << YAML::Value << u.distance_m;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_scenario(const Scenario& scn, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file '" + path.string() + "'");
  out << dump_scenario(scn);
}

int active_count(const Scenario& scn, std::size_t slice, int t) {
  int n = scn.slices.at(slice).initial_users;
  for (const auto& ev : scn.events) {
    if (ev.slot > t) break;
    if (ev.slice == scn.slices[slice].id) n = ev.user_count;
  }
  return n;
}

std::vector<UserState> active_users(const Scenario& scn, int t) {
  if (t < 0 || t >= scn.horizon_slots) {
    throw std::out_of_range("slot " + std::to_string(t) + " outside [0, " +
                            std::to_string(scn.horizon_slots) + ")");
  }
  std::vector<int> remaining(scn.slices.size());
  for (std::size_t s = 0; s < scn.slices.size(); ++s) remaining[s] = active_count(scn, s, t);
  std::vector<UserState> out;
  for (const auto& u : scn.users) {
    if (remaining[u.slice] > 0) {
      --remaining[u.slice];
      out.push_back(u);
    }
  }
  return out;
}

bool admission_flag(const Scenario& scn, std::string_view slice_id, int t) {
  const auto idx = scn.slice_index(slice_id);
  const auto& spec = scn.slices[idx];
  if (!spec.is_rll()) {
    throw std::invalid_argument("admission flag is undefined for self-managed slice '" +
                                spec.id + "'");
  }
  return active_count(scn, idx, t) < spec.rll().max_users;
}

}  // namespace slicing
