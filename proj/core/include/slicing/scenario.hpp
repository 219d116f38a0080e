#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slicing/types.hpp"

namespace slicing {

/// Raised when a config file is not valid YAML or has the wrong shape.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a scenario violates an invariant. `field()` names the
/// offending key (e.g. "slices[2].reliability").
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct PhyParams {
  double total_bandwidth_hz = 10e6;
  int num_prbs = 50;
  double noise_psd_dbm_hz = -173.9;
  double carrier_freq_hz = 900e6;
  double pathloss_exponent = 3.0;
  double cell_radius_m = 1500.0;

  /// Bandwidth of a single PRB; the rate formula's per-PRB share.
  double prb_bandwidth_hz() const { return total_bandwidth_hz / num_prbs; }

  friend bool operator==(const PhyParams&, const PhyParams&) = default;
};

/// Capacity-contracted slice. The tenant manages its own QoS.
struct SelfManaged {
  double capacity_bps = 0.0;
  double per_user_demand_bps = 250e3;
  friend bool operator==(const SelfManaged&, const SelfManaged&) = default;
};

/// Reliable low-latency slice: P{delay > d_max} < 1 - reliability per user.
struct Rll {
  double d_max_s = 0.0;
  double reliability = 0.0;
  double arrival_bps = 0.0;
  double mean_packet_bits = 0.0;
  int max_users = 1;
  friend bool operator==(const Rll&, const Rll&) = default;
};

struct SliceSpec {
  std::string id;
  std::variant<SelfManaged, Rll> kind;
  int initial_users = 0;

  bool is_rll() const { return std::holds_alternative<Rll>(kind); }
  bool is_self_managed() const { return std::holds_alternative<SelfManaged>(kind); }
  const Rll& rll() const { return std::get<Rll>(kind); }
  const SelfManaged& self_managed() const { return std::get<SelfManaged>(kind); }

  friend bool operator==(const SliceSpec&, const SliceSpec&) = default;
};

struct UserState {
  UserId id;
  std::size_t slice = 0;  // index into Scenario::slices
  double distance_m = 0.0;
  friend bool operator==(const UserState&, const UserState&) = default;
};

/// At `slot`, the slice's active user count becomes `user_count`.
struct Event {
  int slot = 0;
  std::string slice;
  int user_count = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct Scenario {
  PhyParams phy;
  std::vector<SliceSpec> slices;
  std::vector<UserState> users;  // ascending id; every user that is ever active
  std::vector<Event> events;     // strictly increasing slot
  int horizon_slots = 500;
  double slot_duration_s = 1e-3;
  std::uint64_t rng_seed = 1;

  /// Index of the slice named `id`; throws std::out_of_range if absent.
  std::size_t slice_index(std::string_view id) const;
  const SliceSpec& slice(std::string_view id) const { return slices[slice_index(id)]; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks every invariant; throws ValidationError naming the field.
void validate(const Scenario& scn);

/// Lower bound of the uniform user-placement annulus.
inline constexpr double kMinUserDistanceM = 35.0;

/// Creates users for every slice (enough for the largest count the slice
/// ever reaches) at distances uniform in (35 m, cell_radius_m], drawn from
/// the scenario seed.
std::vector<UserState> place_users(const Scenario& scn);

Scenario parse_scenario(std::string_view yaml_text);
Scenario load_scenario(const std::filesystem::path& path);

std::string dump_scenario(const Scenario& scn);
void save_scenario(const Scenario& scn, const std::filesystem::path& path);

/// Number of users of slice `slice` active in slot t.
int active_count(const Scenario& scn, std::size_t slice, int t);

/// Users active at slot t, ascending id. Within a slice, the lowest ids are
/// activated first.
std::vector<UserState> active_users(const Scenario& scn, int t);

/// Whether an RLL slice is inside its contracted user count at slot t
/// (strictly below max_users). Throws std::invalid_argument for a
/// self-managed slice.
bool admission_flag(const Scenario& scn, std::string_view slice_id, int t);

}  // namespace slicing
