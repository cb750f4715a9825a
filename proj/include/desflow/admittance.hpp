#pragma once

#include "desflow/netmodel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <memory>
#include <ostream>
#include <vector>

namespace desflow {

using Complex = std::complex<double>;
using Complex3x3 = Eigen::Matrix3cd;

struct PerUnitBases {
  double s_base_kva = 0;  // per-phase
  double v_base_ln_primary = 0, v_base_ln_secondary = 0;  // volts line-to-neutral
  double z_base_primary = 0, z_base_secondary = 0;        // ohms
};

enum class Side { Primary, Secondary };

/// Side of each bus relative to the transformer (all Secondary when there is
/// no transformer). Throws if a line straddles the transformer.
std::vector<Side> bus_sides(const NetworkModel& net);

/// Rescales line and transformer impedances onto the system per-unit bases.
std::pair<NetworkModel, PerUnitBases> to_per_unit(const NetworkModel& net);

/// 3x3 admittance sub-block of one line: series impedance inverted on the
/// present-phase sub-block, zeros elsewhere. No shunt term.
Complex3x3 line_submatrix(const LineRecord& line, const LineCode& code);

struct XfmrBlocks {
  Complex3x3 pp, ps, sp, ss;
};

/// Transformer self/coupling blocks including taps and the stabilizing
/// shunt on the pp/ss diagonals.
XfmrBlocks transformer_blocks(const TransformerSpec& spec);

/// Nodal admittance matrix over flattened (bus, phase) indices 3*bus+phase.
/// Absent phases keep zero rows and columns and are flagged not-present.
struct YBus {
  int n_bus = 0;
  std::vector<char> present;  // size 3*n_bus
  Eigen::SparseMatrix<Complex> y;

  int size() const { return 3 * n_bus; }
  static int flat(int bus, int phase) { return 3 * bus + phase; }
  Complex at(int k, int j) const { return y.coeff(k, j); }
  double g(int k, int j) const { return y.coeff(k, j).real(); }
  double b(int k, int j) const { return y.coeff(k, j).imag(); }
};

YBus assemble_ybus(const NetworkModel& per_unit_net);

void write_ybus_csv(const YBus& y, std::ostream& os);

/// One branch of the balanced (single-phase-equivalent) network view.
struct DcBranch {
  int from = 0, to = 0;   // bus indices
  double b_pu = 0;        // susceptance parameter -Im(1/z_eq)
  Complex z_eq{0, 0};     // balanced equivalent impedance (pu)
};

/// Balanced equivalent susceptance per branch (lines and transformer),
/// from the mean of present-phase self impedances.
std::vector<DcBranch> dc_susceptance(const NetworkModel& per_unit_net);

}  // namespace desflow
