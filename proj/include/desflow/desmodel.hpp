#pragma once

#include "desflow/admittance.hpp"
#include "desflow/modelir.hpp"
#include "desflow/netmodel.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace desflow {

/// Annuity factor converting an investment into an equivalent annual cost.
/// rate = 0 degenerates to straight-line 1/years.
double capital_recovery_factor(double rate, double years);

/// Big-M used for the buy/sell and charge/discharge switching constraints
/// and for the battery-type selection, comfortably above any single-house
/// flow at desk scale.
inline constexpr double kBigM = 50.0;

/// Builds the technology sizing and operation model: objective, balances,
/// buy/sell and charge/discharge switching, storage dynamics, battery-type
/// selection. Network-free; attach one of the network formulations next.
ModelIR build_des_core(const ScenarioData& sc);

/// Maps house index -> bus index; every scenario load id must name a load
/// bus of the network.
std::vector<int> house_bus_map(const NetworkModel& net, const ScenarioData& sc);

/// Linear active-power flow over bus angles (balanced susceptance view).
void attach_dc_network(ModelIR& m, const NetworkModel& pu_net,
                       const std::vector<DcBranch>& dc, const ScenarioData& sc);

/// Multiphase AC power flow: V/theta/P/Q per present (bus, phase, time),
/// polar injection equations, slack pinning, voltage bounds, phase-indicator
/// linking of house flows, connector zero-injection rows.
void attach_mopf(ModelIR& m, const NetworkModel& pu_net,
                 std::shared_ptr<const YBus> ybus, const ScenarioData& sc);

/// Single representative phase AC power flow on the balanced-equivalent
/// branch impedances; full house flows mapped onto the one phase.
void attach_balanced_opf(ModelIR& m, const NetworkModel& pu_net,
                         const ScenarioData& sc);

/// Replaces the buy/sell and charge/discharge binaries with complementarity
/// pairs regularized at epsilon; keeps the purchase cap and nonnegativity.
/// Battery-type selection binaries are untouched. Throws if called twice.
ModelIR reformulate_complementarity(const ModelIR& m, double epsilon);

enum class FixScope { BinaryTopology, DesignAndBinaries };

/// Collects the scope's variable values from a solved model, keyed for
/// transfer into a second model via fix_variables.
std::map<SemKey, double> collect_assignment(const ModelIR& m,
                                            const Eigen::VectorXd& x,
                                            FixScope scope);

/// Pins the scope's variables to the assignment (bounds collapse). Scope
/// variables missing from the assignment are an error; assignment entries
/// for variables not present in the model (e.g. reformulated binaries) are
/// ignored. Operational continuous variables always stay free.
ModelIR fix_variables(const ModelIR& m, const std::map<SemKey, double>& assignment,
                      FixScope scope);

struct HouseDesign {
  std::string house;
  double panels = 0;
  double pv_cap_kw = 0;
  double boiler_cap_kw = 0;
  std::vector<double> battery_kwh;  // per type
  std::vector<double> selected;     // W per type
};

struct DesignDecisionSet {
  std::vector<HouseDesign> houses;
};

/// Time series of one run, [season][time][house] ([...][btype] where noted).
struct OperatingSchedule {
  std::vector<std::vector<std::vector<double>>> e_grid, e_pv, e_sold, h_boiler,
      pv_total;
  std::vector<std::vector<std::vector<std::vector<double>>>> e_ch_pv, e_ch_grid,
      e_ch, e_disch, e_stored;
};

/// Annualized cost components in £/yr. TAC is the exact signed sum.
struct CostBreakdown {
  double grid_cost = 0;
  double pv_investment = 0, pv_operation = 0;
  double boiler_investment = 0, boiler_operation = 0;
  double battery_investment = 0, battery_operation = 0;
  double export_income = 0, generation_income = 0;

  double total() const {
    return grid_cost + pv_investment + pv_operation + boiler_investment +
           boiler_operation + battery_investment + battery_operation -
           export_income - generation_income;
  }
};

/// Populates design, schedule, and cost records from a primal point and
/// verifies the cost identity against the model objective (1e-6 pounds).
std::tuple<DesignDecisionSet, OperatingSchedule, CostBreakdown> extract_solution(
    const ModelIR& m, const ScenarioData& sc, const Eigen::VectorXd& x);

}  // namespace desflow
