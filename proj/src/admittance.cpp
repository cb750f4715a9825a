#include "desflow/admittance.hpp"

#include "desflow/csvio.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace desflow {

std::vector<Side> bus_sides(const NetworkModel& net) {
  std::vector<Side> side(net.buses.size(), Side::Secondary);
  if (!net.transformer) return side;

  int pi = net.bus_index(net.xfmr_primary);
  int si = net.bus_index(net.xfmr_secondary);
  if (pi < 0 || si < 0) throw std::runtime_error("transformer terminals missing");

  std::vector<int> mark(net.buses.size(), -1);
  auto flood = [&](int start, int tag) {
    std::queue<int> q;
    q.push(start);
    mark[start] = tag;
    while (!q.empty()) {
      int i = q.front();
      q.pop();
      const std::string& id = net.buses[i].id;
      for (const auto& l : net.lines) {
        int other = -1;
        if (l.from == id) other = net.bus_index(l.to);
        if (l.to == id) other = net.bus_index(l.from);
        if (other >= 0) {
          if (mark[other] == -1) {
            mark[other] = tag;
            q.push(other);
          } else if (mark[other] != tag) {
            throw std::runtime_error("line " + l.from + "-" + l.to +
                                     " spans both transformer sides");
          }
        }
      }
    }
  };
  flood(pi, 0);
  if (mark[si] == 0)
    throw std::runtime_error(
        "transformer terminals are joined by lines bypassing the transformer");
  flood(si, 1);
  for (std::size_t i = 0; i < net.buses.size(); ++i)
    side[i] = mark[i] == 0 ? Side::Primary : Side::Secondary;
  return side;
}

std::pair<NetworkModel, PerUnitBases> to_per_unit(const NetworkModel& net) {
  PerUnitBases bases;
  bases.s_base_kva = net.s_base_kva;
  bases.v_base_ln_primary = net.v_ll_base_primary / std::sqrt(3.0);
  bases.v_base_ln_secondary = net.v_ll_base_secondary / std::sqrt(3.0);
  bases.z_base_primary =
      bases.v_base_ln_primary * bases.v_base_ln_primary / (bases.s_base_kva * 1e3);
  bases.z_base_secondary = bases.v_base_ln_secondary * bases.v_base_ln_secondary /
                           (bases.s_base_kva * 1e3);

  std::vector<Side> side = bus_sides(net);

  NetworkModel out = net;
  // A linecode may be used on both sides of the transformer; rescale per
  // side and split the code when that happens.
  std::map<std::string, std::map<int, std::string>> scaled;  // name -> side -> new
  std::map<std::string, LineCode> new_codes;
  for (auto& line : out.lines) {
    Side s = side[net.bus_index(line.from)];
    double zb = s == Side::Primary ? bases.z_base_primary : bases.z_base_secondary;
    int key = s == Side::Primary ? 0 : 1;
    auto& per_side = scaled[line.linecode];
    auto it = per_side.find(key);
    if (it == per_side.end()) {
      LineCode c = net.linecodes.at(line.linecode);
      if (!per_side.empty()) c.name += (key == 0 ? "#p" : "#s");
      c.r /= zb;
      c.x /= zb;
      new_codes[c.name] = c;
      it = per_side.emplace(key, c.name).first;
    }
    line.linecode = it->second;
  }
  out.linecodes = std::move(new_codes);

  if (out.transformer) {
    TransformerSpec& t = *out.transformer;
    // base change for the leakage impedance: z_new = z_old * (S_new/S_old)
    // * (V_old/V_new)^2, referenced to the secondary side
    double s_old = t.kva / 3.0;
    double v_old = t.v_secondary_ll / std::sqrt(3.0);
    double ratio = (bases.s_base_kva / s_old) *
                   (v_old / bases.v_base_ln_secondary) *
                   (v_old / bases.v_base_ln_secondary);
    t.r_pu *= ratio;
    t.x_pu *= ratio;
  }
  out.per_unit = true;
  return {std::move(out), bases};
}

Complex3x3 line_submatrix(const LineRecord& line, const LineCode& code) {
  std::vector<int> act;
  for (int p = 0; p < 3; ++p)
    if (line.phases.has(p) && code.phases.has(p)) act.push_back(p);
  Complex3x3 out = Complex3x3::Zero();
  if (act.empty()) return out;

  Eigen::MatrixXcd z(act.size(), act.size());
  for (std::size_t i = 0; i < act.size(); ++i)
    for (std::size_t j = 0; j < act.size(); ++j)
      z(i, j) = Complex(code.r(act[i], act[j]), code.x(act[i], act[j])) *
                line.length_km;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(z);
  if (!lu.isInvertible())
    throw std::runtime_error("line " + line.from + "-" + line.to +
                             ": singular impedance sub-block");
  Eigen::MatrixXcd y = lu.inverse();
  for (std::size_t i = 0; i < act.size(); ++i)
    for (std::size_t j = 0; j < act.size(); ++j) out(act[i], act[j]) = y(i, j);
  return out;
}

XfmrBlocks transformer_blocks(const TransformerSpec& spec) {
  const Complex y_t = 1.0 / Complex(spec.r_pu, spec.x_pu);
  const Complex3x3 I = Complex3x3::Identity();

  Complex3x3 yI = y_t * I;
  Complex3x3 yII, yIII;
  yII << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  yII *= y_t / 3.0;
  yIII << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  yIII *= y_t / std::sqrt(3.0);

  XfmrBlocks b;
  switch (spec.connection) {
    case XfmrConnection::WyeGWyeG:
      if (std::abs(spec.shift_deg) > 1e-9)
        throw std::runtime_error("wye-g-wye-g transformer requires 0 deg shift");
      b.pp = yI;
      b.ss = yI;
      b.ps = -yI;
      b.sp = -yI;
      break;
    case XfmrConnection::DeltaWyeG:
      // Delta primary, grounded-wye secondary lagging by 30 degrees.
      if (std::abs(spec.shift_deg + 30.0) > 1e-9)
        throw std::runtime_error("delta-wye-g transformer requires -30 deg shift");
      b.pp = yII;
      b.ss = yI;
      b.ps = yIII;
      b.sp = yIII.transpose();
      break;
    default:
      throw std::runtime_error("unsupported transformer connection");
  }

  const double a = spec.tap_p, bt = spec.tap_s;
  b.pp /= a * a;
  b.ss /= bt * bt;
  b.ps /= a * bt;
  b.sp /= a * bt;

  b.pp += spec.shunt_pu * I;
  b.ss += spec.shunt_pu * I;
  return b;
}

YBus assemble_ybus(const NetworkModel& net) {
  if (!net.per_unit)
    throw std::runtime_error("assemble_ybus requires a per-unit network");
  YBus yb;
  yb.n_bus = static_cast<int>(net.buses.size());
  yb.present.assign(3 * yb.n_bus, 0);
  for (int i = 0; i < yb.n_bus; ++i)
    for (int p = 0; p < 3; ++p)
      yb.present[YBus::flat(i, p)] = net.buses[i].phases.has(p) ? 1 : 0;

  std::vector<Eigen::Triplet<Complex>> trip;
  auto scatter = [&](int bn, int bm, const Complex3x3& blk) {
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        if (blk(p, q) != Complex(0, 0))
          trip.emplace_back(YBus::flat(bn, p), YBus::flat(bm, q), blk(p, q));
  };

  for (const auto& line : net.lines) {
    Complex3x3 y = line_submatrix(line, net.code_of(line));
    int n = net.bus_index(line.from), m = net.bus_index(line.to);
    scatter(n, n, y);
    scatter(m, m, y);
    scatter(n, m, -y);
    scatter(m, n, -y);
  }

  if (net.transformer) {
    XfmrBlocks blk = transformer_blocks(*net.transformer);
    int p = net.bus_index(net.xfmr_primary), s = net.bus_index(net.xfmr_secondary);
    scatter(p, p, blk.pp);
    scatter(s, s, blk.ss);
    scatter(p, s, blk.ps);
    scatter(s, p, blk.sp);
  }

  yb.y.resize(3 * yb.n_bus, 3 * yb.n_bus);
  yb.y.setFromTriplets(trip.begin(), trip.end());
  yb.y.makeCompressed();
  return yb;
}

void write_ybus_csv(const YBus& yb, std::ostream& os) {
  os << "row,col,real,imag\n";
  for (int k = 0; k < yb.y.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(yb.y, k); it; ++it)
      os << it.row() << ',' << it.col() << ',' << fmt_full(it.value().real())
         << ',' << fmt_full(it.value().imag()) << '\n';
}

std::vector<DcBranch> dc_susceptance(const NetworkModel& net) {
  if (!net.per_unit)
    throw std::runtime_error("dc_susceptance requires a per-unit network");
  std::vector<DcBranch> out;
  for (const auto& line : net.lines) {
    const LineCode& c = net.code_of(line);
    Complex z_eq(0, 0);
    int count = 0;
    for (int p = 0; p < 3; ++p)
      if (line.phases.has(p) && c.phases.has(p)) {
        z_eq += Complex(c.r(p, p), c.x(p, p)) * line.length_km;
        ++count;
      }
    if (count == 0 || z_eq == Complex(0, 0))
      throw std::runtime_error("line " + line.from + "-" + line.to +
                               ": zero impedance branch");
    z_eq /= static_cast<double>(count);
    DcBranch b;
    b.from = net.bus_index(line.from);
    b.to = net.bus_index(line.to);
    b.z_eq = z_eq;
    b.b_pu = -(1.0 / z_eq).imag();
    out.push_back(b);
  }
  if (net.transformer) {
    const auto& t = *net.transformer;
    Complex z(t.r_pu, t.x_pu);
    if (z == Complex(0, 0)) throw std::runtime_error("transformer: zero impedance");
    DcBranch b;
    b.from = net.bus_index(net.xfmr_primary);
    b.to = net.bus_index(net.xfmr_secondary);
    b.z_eq = z;
    b.b_pu = -(1.0 / z).imag();
    out.push_back(b);
  }
  return out;
}

}  // namespace desflow
