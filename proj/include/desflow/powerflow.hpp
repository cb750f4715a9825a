#pragma once

#include "desflow/admittance.hpp"
#include "desflow/netmodel.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

namespace desflow {

/// Polar voltage state over flattened (bus, phase) indices, aligned with a
/// YBus. Angles in radians.
struct VoltageState {
  Eigen::VectorXd v, theta;
};

/// Specified injections. Slack entries are free (solved for).
struct InjectionSet {
  Eigen::VectorXd p, q;             // per-unit, per flat index
  std::vector<char> is_slack;       // per flat index
};

struct PFOptions {
  double tol = 1e-8;  // inf-norm of the mismatch, pu
  int max_iter = 50;
};

struct PFSolution {
  VoltageState state;
  Eigen::VectorXd realized_p, realized_q;  // injections at the solution
  int iterations = 0;
  double mismatch = 0;
  bool converged = false;
};

/// Active/reactive injection at one flattened node from the polar equations.
std::pair<double, double> injection_eval(const YBus& y, const VoltageState& v,
                                         int flat_index);

/// Full analytic Jacobian d(P,Q)/d(theta,V) over present node-phases.
/// Rows: [P_k...; Q_k...], columns: [theta_k...; V_k...] in flat order
/// restricted to present entries (see jacobian_index).
struct JacobianLayout {
  std::vector<int> flat_of_entry;  // entry -> flat index
  std::vector<int> entry_of_flat;  // flat index -> entry or -1
  int n() const { return static_cast<int>(flat_of_entry.size()); }
};
JacobianLayout jacobian_layout(const YBus& y);
Eigen::SparseMatrix<double> pf_jacobian(const YBus& y, const VoltageState& v);

/// Flat initial state: source magnitude everywhere, reference angles
/// 0/-120/+120 with the transformer shift applied on the secondary side.
VoltageState flat_state(const NetworkModel& net, const YBus& y);

PFSolution solve_powerflow(const YBus& y, const InjectionSet& inj,
                           const VoltageState& start, const PFOptions& opts = {});

/// One row of a snapshot load table.
struct SnapshotLoad {
  double time_h = 0;
  std::string bus;
  int phase = 0;
  double p_kw = 0, q_kvar = 0;
};

struct SnapshotResult {
  double time_h = 0;
  PFSolution solution;
  double min_dev_pct = 0, max_dev_pct = 0;  // vs reference when given
};

struct SnapshotReport {
  std::vector<SnapshotResult> snapshots;
  bool all_converged = true;
  bool has_reference = false;
};

/// Reference voltages in the voltage CSV layout (time,bus,phase,v_pu,...).
struct VoltageRecord {
  double time_h = 0;
  std::string bus;
  int phase = 0;
  double v_pu = 0;
  double theta_deg = 0;
};

SnapshotReport snapshot_verify(const NetworkModel& net,
                               const std::vector<SnapshotLoad>& loads,
                               const std::vector<VoltageRecord>& reference = {});

std::vector<SnapshotLoad> read_snapshot_loads(const std::string& path);
std::vector<VoltageRecord> read_voltage_csv(const std::string& path);
void write_voltage_csv(const NetworkModel& net, const SnapshotReport& rep,
                       std::ostream& os);

struct VoltageViolation {
  double time_h = 0;
  std::string bus;
  int phase = 0;
  double v_pu = 0;
  double bound_pu = 0;    // the bound breached
  double breach_pu = 0;   // magnitude of the breach
};

/// Every (bus, phase, time) with V outside [lb, ub], ordered by
/// (time, bus, phase).
std::vector<VoltageViolation> check_voltage_limits(
    const NetworkModel& net, const std::vector<std::pair<double, PFSolution>>& sols,
    double lb_pu, double ub_pu);

}  // namespace desflow
