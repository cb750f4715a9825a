#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace desflow {

/// Which of the three phases a bus or line carries.
struct PhaseSet {
  std::array<bool, 3> on{false, false, false};

  static PhaseSet abc() { return {{true, true, true}}; }
  static PhaseSet single(int phase) {
    PhaseSet p;
    p.on[phase] = true;
    return p;
  }
  bool has(int phase) const { return on[phase]; }
  int count() const { return int(on[0]) + int(on[1]) + int(on[2]); }
  bool subset_of(const PhaseSet& o) const {
    for (int p = 0; p < 3; ++p)
      if (on[p] && !o.on[p]) return false;
    return true;
  }
  bool operator==(const PhaseSet&) const = default;
};

inline const char* phase_name(int p) { return p == 0 ? "a" : (p == 1 ? "b" : "c"); }

enum class BusKind { Slack, Connector, Load };

/// A bus plus its phase-connection indicator. Load buses carry a one-hot
/// indicator selecting the phase the dwelling is wired to; connector buses
/// have an all-zero indicator.
struct BusRecord {
  std::string id;
  BusKind kind = BusKind::Connector;
  PhaseSet phases = PhaseSet::abc();
  std::array<double, 3> psi{0, 0, 0};

  int psi_phase() const {  // -1 unless exactly one phase flagged
    int found = -1, count = 0;
    for (int p = 0; p < 3; ++p)
      if (psi[p] != 0.0) {
        found = p;
        ++count;
      }
    return count == 1 ? found : -1;
  }
  bool operator==(const BusRecord&) const = default;
};

/// Series impedance parameters per km for a conductor arrangement.
struct LineCode {
  std::string name;
  Eigen::Matrix3d r = Eigen::Matrix3d::Zero();  // ohm/km (pu/km once per-unit)
  Eigen::Matrix3d x = Eigen::Matrix3d::Zero();
  PhaseSet phases = PhaseSet::abc();

  bool operator==(const LineCode& o) const {
    return name == o.name && r == o.r && x == o.x && phases == o.phases;
  }
};

struct LineRecord {
  std::string from, to;
  double length_km = 0;
  std::string linecode;
  PhaseSet phases = PhaseSet::abc();
  bool operator==(const LineRecord&) const = default;
};

enum class XfmrConnection { DeltaWyeG, WyeGWyeG };

/// Two-winding transformer between the slack (primary) bus and the feeder
/// root. Impedance is on the transformer's own base.
struct TransformerSpec {
  XfmrConnection connection = XfmrConnection::WyeGWyeG;
  double kva = 0;  // three-phase rating
  double v_primary_ll = 0, v_secondary_ll = 0;
  double r_pu = 0, x_pu = 0;
  double tap_p = 1.0, tap_s = 1.0;
  double shift_deg = 0.0;
  double shunt_pu = 1e-5;  // stabilizing shunt on terminal diagonals
  bool operator==(const TransformerSpec&) const = default;
};

struct NetworkModel {
  std::vector<BusRecord> buses;
  std::vector<LineRecord> lines;
  std::map<std::string, LineCode> linecodes;
  std::optional<TransformerSpec> transformer;
  std::string xfmr_primary, xfmr_secondary;  // bus ids, set when transformer present

  double source_v_pu = 1.0;
  double source_angle_deg = 0.0;
  double v_ub_frac = 1.10;  // of nominal, UK LV statutory default
  double v_lb_frac = 0.94;

  double s_base_kva = 0;  // per-phase apparent power base
  double v_ll_base_primary = 0, v_ll_base_secondary = 0;  // volts
  bool per_unit = false;  // linecode/transformer impedances rescaled to pu

  int bus_index(const std::string& id) const;
  int slack_index() const;
  std::vector<int> load_bus_indices() const;
  const LineCode& code_of(const LineRecord& line) const;
  /// Bus degree counting lines and the transformer edge.
  int degree(int bus) const;

  bool operator==(const NetworkModel&) const = default;
};

/// Parses buses.csv, linecodes.csv, lines.csv, transformer.csv, source.csv
/// from a directory. Errors carry file:line positions.
NetworkModel parse_network(const std::string& root_path);

/// Writes the model back out in the same CSV schema (parse round-trips).
void write_network(const NetworkModel& net, const std::string& dir);

/// Returns human-readable descriptions of every invariant violation;
/// empty means the model is well-formed and connected.
std::vector<std::string> validate_network(const NetworkModel& net);

/// Eliminates unprotected degree-2 connector buses by series-summing the
/// adjacent lines' impedance matrices. Load and slack buses must be listed
/// as protected.
NetworkModel reduce_series_nodes(const NetworkModel& net,
                                 const std::set<std::string>& protected_ids);

/// Tariff prices by hour of day plus fuel/export rates, all £/kWh.
struct TariffSchedule {
  double day_price = 0.18;
  double night_price = 0.08;
  int night_start_hour = 0;  // [start, end) in wall-clock hours
  int night_end_hour = 7;
  double gas_price = 0.02514;
  double export_tariff = 0.0503;
  double generation_tariff = 0.1;

  double price_at(double hour) const {
    int h = static_cast<int>(hour) % 24;
    return (h >= night_start_hour && h < night_end_hour) ? night_price : day_price;
  }
};

struct BatteryTech {
  std::string name = "li-ion";
  double energy_density_kwh_m3 = 20;
  double dod_max = 0.85;
  double soc_max = 0.9;
  double cost_per_kwh = 270;
  double op_cost_per_kwh_yr = 11;
  double eta_ch = 0.94;
  double eta_disch = 0.91;
};

struct TechnologyParams {
  double pv_cost_per_panel = 450;
  double pv_efficiency = 0.18;
  double pv_fixed_op_cost = 12.5;  // £/kW-yr
  double panel_area_m2 = 1.75;
  double panel_capacity_kw = 0.25;
  double boiler_cost_per_kw = 120;
  double boiler_efficiency = 0.94;
  std::vector<BatteryTech> batteries{BatteryTech{}};
};

/// Demand/irradiance series, tariffs, technology and economic parameters
/// for one design study.
struct ScenarioData {
  std::vector<std::string> seasons;
  std::vector<double> days_per_season;
  double dt_hours = 1.0;
  std::vector<std::string> loads;  // load ids, matching load bus ids
  std::vector<double> time_h;      // length T, hours within the day

  // elec[s][t][i], heat[s][t][i] in kW; irradiance[s][t] in kW/m^2
  std::vector<std::vector<std::vector<double>>> elec, heat;
  std::vector<std::vector<double>> irradiance;

  TariffSchedule tariff;
  TechnologyParams tech;
  std::map<std::string, double> roof_area_m2;
  std::map<std::string, double> battery_volume_m3;
  double interest_rate = 0.075;
  double lifetime_years = 20;
  double power_factor = 0.95;

  // network bound overrides carried through to the model when present
  std::optional<double> v_ub_frac, v_lb_frac, s_base_kva;

  int n_seasons() const { return static_cast<int>(seasons.size()); }
  int n_times() const { return static_cast<int>(time_h.size()); }
  int n_loads() const { return static_cast<int>(loads.size()); }
  int n_btypes() const { return static_cast<int>(tech.batteries.size()); }
  double roof_of(const std::string& load) const;
  double volume_of(const std::string& load) const;
};

struct ScenarioPaths {
  std::string config;        // key = value file
  std::string profiles_dir;  // <season>_elec.csv, <season>_heat.csv, irradiance.csv
};

ScenarioData parse_scenario(const ScenarioPaths& paths);

/// Sanity checks on the scenario invariants (nonnegative demands,
/// efficiency ranges, consistent dimensions).
std::vector<std::string> validate_scenario(const ScenarioData& sc);

}  // namespace desflow
