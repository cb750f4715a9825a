#pragma once

#include "desflow/admittance.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace desflow {

enum class VarKind { Continuous, Binary };
enum class Sense { LE, EQ, GE };

/// Semantic roles of decision variables. One role per model symbol.
enum class Role : std::uint8_t {
  PanelCount,        // PV panels per house (continuous)
  BatteryCapacity,   // kWh per house/battery type
  BoilerCapacity,    // kW per house
  BatterySelect,     // W binary per house/type
  GridImport,        // E_grid kW
  PvSelfUse,         // E_pv kW
  PvExport,          // E_sold kW
  ChargeFromPv,      // kW
  ChargeFromGrid,    // kW
  Charge,            // aggregate charge kW
  Discharge,         // kW
  StoredEnergy,      // kWh
  BoilerHeat,        // kW
  PvTotal,           // total PV generation kW
  BuySell,           // X binary
  ChargeBinary,      // Q binary
  VoltageMag,        // pu
  VoltageAngle,      // rad
  ActiveInjection,   // pu, per node-phase (phase = -1 for the dc view)
  ReactiveInjection  // pu
};

const char* role_name(Role r);

/// Index key for one variable: role plus the coordinates that apply.
/// Unused coordinates stay -1.
struct SemKey {
  Role role{};
  std::int16_t season = -1, time = -1, house = -1, btype = -1, bus = -1,
               phase = -1;

  auto tied() const {
    return std::tie(role, season, time, house, btype, bus, phase);
  }
  bool operator<(const SemKey& o) const { return tied() < o.tied(); }
  bool operator==(const SemKey& o) const { return tied() == o.tied(); }
};

struct VarDef {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0, ub = 0;
  SemKey key;
};

struct LinTerm {
  int var;
  double coef;
};

struct LinRow {
  std::vector<LinTerm> terms;
  Sense sense = Sense::LE;
  double rhs = 0;
  std::string family;  // equation family tag for diagnostics
};

/// Two nonnegative variables of which at most one may be active:
/// enforced as x*y <= epsilon after reformulation.
struct ComplementarityPair {
  int x = -1, y = -1;
};

/// One residual equation of a power-flow block:
///   power_var - P_node(V, theta) = 0   (or Q when reactive).
struct PowerFlowEquation {
  int power_var = -1;
  int node = -1;  // flat (bus, phase) index into the block's YBus
  bool reactive = false;
};

/// Nonlinear power-flow equations for one (season, time) slice. v_var and
/// th_var map flat node indices to variable ids (-1 when absent/off).
struct PowerFlowBlock {
  std::shared_ptr<const YBus> ybus;
  int season = 0, time = 0;
  std::vector<int> v_var, th_var;
  std::vector<PowerFlowEquation> equations;
};

/// Solver-agnostic optimization model: variables, linear rows, nonlinear
/// power-flow blocks, complementarity pairs, and a linear objective.
struct ModelIR {
  std::vector<VarDef> vars;
  std::vector<LinRow> rows;
  std::vector<PowerFlowBlock> pf_blocks;
  std::vector<ComplementarityPair> pairs;
  double epsilon = 0;  // current regularization level for the pairs
  std::vector<LinTerm> objective;
  double obj_constant = 0;
  std::map<SemKey, int> index;

  int add_var(const std::string& name, VarKind kind, double lb, double ub,
              const SemKey& key);
  void add_row(LinRow row);
  int lookup(const SemKey& key) const;  // -1 when absent
  int var_at(const SemKey& key) const;  // throws when absent

  int n_vars() const { return static_cast<int>(vars.size()); }
  int n_binary() const;
  bool has_nonlinear() const { return !pf_blocks.empty() || !pairs.empty(); }

  double eval_objective(const Eigen::VectorXd& x) const;
  /// Activity of one linear row.
  double eval_row(const LinRow& row, const Eigen::VectorXd& x) const;
  /// Max violation over linear rows, bounds, pair products and pf blocks.
  double max_violation(const Eigen::VectorXd& x) const;

  std::map<std::string, int> family_counts() const;
};

/// Residual and first/second derivatives of the power-flow part
/// -P_node(V,theta) of a block equation; used by NLP and checks.
struct PfEquationWork {
  double residual = 0;                       // power_var - P(V,theta)
  std::vector<std::pair<int, double>> grad;  // d residual / d var
};
PfEquationWork eval_pf_equation(const PowerFlowBlock& blk,
                                const PowerFlowEquation& eq,
                                const Eigen::VectorXd& x, bool want_grad);

/// Scatter lambda * Hessian(residual) of one block equation into triplets
/// (lower triangle, full variable space).
void accumulate_pf_hessian(const PowerFlowBlock& blk, const PowerFlowEquation& eq,
                           const Eigen::VectorXd& x, double lambda,
                           std::vector<Eigen::Triplet<double>>* out);

/// Writes the linear view in the CPLEX LP text format (binaries marked).
/// Rejects models with nonlinear blocks or pairs.
void write_lp_format(const ModelIR& m, std::ostream& os);

/// Model shape diagnostics (variable/row counts per family, nonzeros).
void write_model_diag_json(const ModelIR& m, std::ostream& os);

}  // namespace desflow
