#include "desflow/modelir.hpp"

#include "desflow/csvio.hpp"
#include "desflow/jsonw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace desflow {

const char* role_name(Role r) {
  switch (r) {
    case Role::PanelCount: return "panel_count";
    case Role::BatteryCapacity: return "battery_capacity";
    case Role::BoilerCapacity: return "boiler_capacity";
    case Role::BatterySelect: return "battery_select";
    case Role::GridImport: return "grid_import";
    case Role::PvSelfUse: return "pv_self_use";
    case Role::PvExport: return "pv_export";
    case Role::ChargeFromPv: return "charge_from_pv";
    case Role::ChargeFromGrid: return "charge_from_grid";
    case Role::Charge: return "charge";
    case Role::Discharge: return "discharge";
    case Role::StoredEnergy: return "stored_energy";
    case Role::BoilerHeat: return "boiler_heat";
    case Role::PvTotal: return "pv_total";
    case Role::BuySell: return "buy_sell";
    case Role::ChargeBinary: return "charge_binary";
    case Role::VoltageMag: return "voltage_mag";
    case Role::VoltageAngle: return "voltage_angle";
    case Role::ActiveInjection: return "p_injection";
    case Role::ReactiveInjection: return "q_injection";
  }
  return "?";
}

int ModelIR::add_var(const std::string& name, VarKind kind, double lb, double ub,
                     const SemKey& key) {
  if (lb > ub)
    throw std::runtime_error("variable " + name + ": lb > ub");
  if (index.count(key))
    throw std::runtime_error("duplicate semantic key for " + name);
  VarDef v;
  v.name = name;
  v.kind = kind;
  v.lb = lb;
  v.ub = ub;
  v.key = key;
  vars.push_back(std::move(v));
  int id = static_cast<int>(vars.size()) - 1;
  index[key] = id;
  return id;
}

void ModelIR::add_row(LinRow row) {
  for (const auto& t : row.terms)
    if (t.var < 0 || t.var >= n_vars())
      throw std::runtime_error("row " + row.family + ": unknown variable index");
  rows.push_back(std::move(row));
}

int ModelIR::lookup(const SemKey& key) const {
  auto it = index.find(key);
  return it == index.end() ? -1 : it->second;
}

int ModelIR::var_at(const SemKey& key) const {
  int id = lookup(key);
  if (id < 0)
    throw std::runtime_error(std::string("no variable with role ") +
                             role_name(key.role));
  return id;
}

int ModelIR::n_binary() const {
  int n = 0;
  for (const auto& v : vars)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

double ModelIR::eval_objective(const Eigen::VectorXd& x) const {
  double v = obj_constant;
  for (const auto& t : objective) v += t.coef * x(t.var);
  return v;
}

double ModelIR::eval_row(const LinRow& row, const Eigen::VectorXd& x) const {
  double v = 0;
  for (const auto& t : row.terms) v += t.coef * x(t.var);
  return v;
}

double ModelIR::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0;
  for (int i = 0; i < n_vars(); ++i) {
    worst = std::max(worst, vars[i].lb - x(i));
    worst = std::max(worst, x(i) - vars[i].ub);
  }
  for (const auto& row : rows) {
    double a = eval_row(row, x);
    if (row.sense == Sense::LE) worst = std::max(worst, a - row.rhs);
    if (row.sense == Sense::GE) worst = std::max(worst, row.rhs - a);
    if (row.sense == Sense::EQ) worst = std::max(worst, std::abs(a - row.rhs));
  }
  for (const auto& pr : pairs)
    worst = std::max(worst, x(pr.x) * x(pr.y) - epsilon);
  for (const auto& blk : pf_blocks)
    for (const auto& eq : blk.equations) {
      auto w = eval_pf_equation(blk, eq, x, false);
      worst = std::max(worst, std::abs(w.residual));
    }
  return worst;
}

std::map<std::string, int> ModelIR::family_counts() const {
  std::map<std::string, int> out;
  for (const auto& r : rows) out[r.family]++;
  return out;
}

PfEquationWork eval_pf_equation(const PowerFlowBlock& blk,
                                const PowerFlowEquation& eq,
                                const Eigen::VectorXd& x, bool want_grad) {
  const YBus& yb = *blk.ybus;
  const int k = eq.node;
  const double vk = x(blk.v_var[k]);
  const double thk = x(blk.th_var[k]);

  PfEquationWork w;
  double acc = 0;
  double d_thk = 0, d_vk = 0;
  for (Eigen::SparseMatrix<Complex>::InnerIterator it(yb.y, k); it; ++it) {
    const int j = static_cast<int>(it.row());
    const double g = it.value().real(), b = it.value().imag();
    if (j == k) {
      // self term: V^2 * g for P, -V^2 * b for Q
      acc += eq.reactive ? -vk * vk * b : vk * vk * g;
      if (want_grad) d_vk += eq.reactive ? -2 * vk * b : 2 * vk * g;
      continue;
    }
    const double vj = x(blk.v_var[j]);
    const double thj = x(blk.th_var[j]);
    const double d = thk - thj;
    const double c = std::cos(d), s = std::sin(d);
    const double ap = g * c + b * s;
    const double aq = g * s - b * c;
    const double kern = eq.reactive ? aq : ap;
    acc += vk * vj * kern;
    if (want_grad) {
      const double dkern_dthk = eq.reactive ? ap : -aq;
      d_vk += vj * kern;
      d_thk += vk * vj * dkern_dthk;
      // residual derivatives (residual = power_var - sum of terms)
      w.grad.emplace_back(blk.v_var[j], -vk * kern);
      w.grad.emplace_back(blk.th_var[j], vk * vj * dkern_dthk);
    }
  }
  w.residual = x(eq.power_var) - acc;
  if (want_grad) {
    w.grad.emplace_back(eq.power_var, 1.0);
    w.grad.emplace_back(blk.v_var[k], -d_vk);
    w.grad.emplace_back(blk.th_var[k], -d_thk);
  }
  return w;
}

void accumulate_pf_hessian(const PowerFlowBlock& blk, const PowerFlowEquation& eq,
                           const Eigen::VectorXd& x, double lambda,
                           std::vector<Eigen::Triplet<double>>* out) {
  if (lambda == 0) return;
  const YBus& yb = *blk.ybus;
  const int k = eq.node;
  const int vk_i = blk.v_var[k], thk_i = blk.th_var[k];
  const double vk = x(vk_i), thk = x(thk_i);

  auto put = [&](int a, int b, double val) {
    if (val == 0) return;
    if (a < b) std::swap(a, b);  // lower triangle
    out->emplace_back(a, b, val);
  };

  // Hessian of residual = -Hessian of the injection expression.
  for (Eigen::SparseMatrix<Complex>::InnerIterator it(yb.y, k); it; ++it) {
    const int j = static_cast<int>(it.row());
    const double g = it.value().real(), b = it.value().imag();
    if (j == k) {
      // d2/dVk2 of Vk^2*g (or -Vk^2*b)
      double h = eq.reactive ? -2 * b : 2 * g;
      put(vk_i, vk_i, -lambda * h);
      continue;
    }
    const int vj_i = blk.v_var[j], thj_i = blk.th_var[j];
    const double vj = x(vj_i);
    const double d = thk - x(thj_i);
    const double c = std::cos(d), s = std::sin(d);
    const double ap = g * c + b * s;
    const double aq = g * s - b * c;
    // kern and its theta_k-derivative for this equation type
    const double kern = eq.reactive ? aq : ap;
    const double dk = eq.reactive ? ap : -aq;    // d kern / d th_k
    const double ddk = eq.reactive ? -aq : -ap;  // d2 kern / d th_k2

    const double m = -lambda;  // residual = ... - term
    put(vk_i, vj_i, m * kern);
    put(vk_i, thk_i, m * vj * dk);
    put(vk_i, thj_i, -m * vj * dk);
    put(vj_i, thk_i, m * vk * dk);
    put(vj_i, thj_i, -m * vk * dk);
    put(thk_i, thk_i, m * vk * vj * ddk);
    put(thj_i, thj_i, m * vk * vj * ddk);
    put(thk_i, thj_i, -m * vk * vj * ddk);
  }
}

void write_lp_format(const ModelIR& m, std::ostream& os) {
  if (m.has_nonlinear())
    throw std::runtime_error("LP export requires a linear model");
  os << "\\ desflow LP export\n";
  os << "Minimize\n obj:";
  int per_line = 0;
  for (const auto& t : m.objective) {
    double c = t.coef;
    os << (c < 0 ? " - " : " + ") << fmt_full(std::abs(c)) << ' '
       << m.vars[t.var].name;
    if (++per_line % 6 == 0) os << "\n    ";
  }
  if (m.objective.empty()) os << " 0 " << (m.vars.empty() ? "x0" : m.vars[0].name);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto& row = m.rows[i];
    os << " c" << i << ":";
    for (const auto& t : row.terms)
      os << (t.coef < 0 ? " - " : " + ") << fmt_full(std::abs(t.coef)) << ' '
         << m.vars[t.var].name;
    os << (row.sense == Sense::LE ? " <= " : row.sense == Sense::GE ? " >= " : " = ")
       << fmt_full(row.rhs) << "\n";
  }
  os << "Bounds\n";
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& v : m.vars) {
    if (v.lb == -inf && v.ub == inf)
      os << ' ' << v.name << " free\n";
    else if (v.lb == -inf)
      os << " -inf <= " << v.name << " <= " << fmt_full(v.ub) << "\n";
    else if (v.ub == inf)
      os << ' ' << fmt_full(v.lb) << " <= " << v.name << "\n";
    else
      os << ' ' << fmt_full(v.lb) << " <= " << v.name << " <= " << fmt_full(v.ub)
         << "\n";
  }
  bool any_bin = false;
  for (const auto& v : m.vars)
    if (v.kind == VarKind::Binary) {
      if (!any_bin) os << "Binary\n";
      any_bin = true;
      os << ' ' << v.name << "\n";
    }
  os << "End\n";
}

void write_model_diag_json(const ModelIR& m, std::ostream& os) {
  JValue root = JValue::object();
  root.set("n_vars", JValue::integer(m.n_vars()));
  root.set("n_binary", JValue::integer(m.n_binary()));
  root.set("n_rows", JValue::integer(static_cast<long long>(m.rows.size())));
  root.set("n_pf_blocks",
           JValue::integer(static_cast<long long>(m.pf_blocks.size())));
  int pf_eqs = 0;
  for (const auto& b : m.pf_blocks) pf_eqs += static_cast<int>(b.equations.size());
  root.set("n_pf_equations", JValue::integer(pf_eqs));
  root.set("n_pairs", JValue::integer(static_cast<long long>(m.pairs.size())));
  root.set("epsilon", JValue::number(m.epsilon));
  long long nnz = 0;
  for (const auto& r : m.rows) nnz += static_cast<long long>(r.terms.size());
  root.set("row_nonzeros", JValue::integer(nnz));
  JValue fam = JValue::object();
  for (const auto& [k, v] : m.family_counts()) fam.set(k, JValue::integer(v));
  root.set("families", std::move(fam));
  os << root.dump();
}

}  // namespace desflow
