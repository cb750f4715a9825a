#include "desflow/powerflow.hpp"

#include "desflow/csvio.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace desflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::pair<double, double> injection_eval(const YBus& yb, const VoltageState& st,
                                         int k) {
  double p = 0, q = 0;
  const double vk = st.v(k), thk = st.theta(k);
  // iterate row k of Y: column-major storage, so walk the k-th row via the
  // transpose pattern (Y is symmetric, use column k)
  for (Eigen::SparseMatrix<Complex>::InnerIterator it(yb.y, k); it; ++it) {
    const int j = static_cast<int>(it.row());
    const double g = it.value().real(), b = it.value().imag();
    const double d = thk - st.theta(j);
    const double c = std::cos(d), s = std::sin(d);
    p += st.v(j) * (g * c + b * s);
    q += st.v(j) * (g * s - b * c);
  }
  return {vk * p, vk * q};
}

JacobianLayout jacobian_layout(const YBus& yb) {
  JacobianLayout L;
  L.entry_of_flat.assign(yb.size(), -1);
  for (int f = 0; f < yb.size(); ++f)
    if (yb.present[f]) {
      L.entry_of_flat[f] = static_cast<int>(L.flat_of_entry.size());
      L.flat_of_entry.push_back(f);
    }
  return L;
}

Eigen::SparseMatrix<double> pf_jacobian(const YBus& yb, const VoltageState& st) {
  const JacobianLayout L = jacobian_layout(yb);
  const int n = L.n();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(yb.y.nonZeros()) * 4);

  for (int ek = 0; ek < n; ++ek) {
    const int k = L.flat_of_entry[ek];
    const double vk = st.v(k), thk = st.theta(k);
    double dp_dthk = 0, dp_dvk = 0, dq_dthk = 0, dq_dvk = 0;
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(yb.y, k); it; ++it) {
      const int j = static_cast<int>(it.row());
      const double g = it.value().real(), b = it.value().imag();
      if (j == k) {
        dp_dvk += 2.0 * vk * g;
        dq_dvk += -2.0 * vk * b;
        continue;
      }
      const int ej = L.entry_of_flat[j];
      const double vj = st.v(j);
      const double d = thk - st.theta(j);
      const double c = std::cos(d), s = std::sin(d);
      const double ap = g * c + b * s;   // P kernel
      const double aq = g * s - b * c;   // Q kernel
      // off-diagonal contributions
      if (ej >= 0) {
        trip.emplace_back(ek, ej, vk * vj * aq);            // dP/dth_j
        trip.emplace_back(ek, n + ej, vk * ap);             // dP/dV_j
        trip.emplace_back(n + ek, ej, -vk * vj * ap);       // dQ/dth_j
        trip.emplace_back(n + ek, n + ej, vk * aq);         // dQ/dV_j
      }
      dp_dthk += -vk * vj * aq;
      dp_dvk += vj * ap;
      dq_dthk += vk * vj * ap;
      dq_dvk += vj * aq;
    }
    trip.emplace_back(ek, ek, dp_dthk);
    trip.emplace_back(ek, n + ek, dp_dvk);
    trip.emplace_back(n + ek, ek, dq_dthk);
    trip.emplace_back(n + ek, n + ek, dq_dvk);
  }

  Eigen::SparseMatrix<double> J(2 * n, 2 * n);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

VoltageState flat_state(const NetworkModel& net, const YBus& yb) {
  VoltageState st;
  st.v = Eigen::VectorXd::Constant(yb.size(), net.source_v_pu);
  st.theta = Eigen::VectorXd::Zero(yb.size());
  std::vector<Side> side = bus_sides(net);
  const double base = net.source_angle_deg * kPi / 180.0;
  const double shift =
      net.transformer ? net.transformer->shift_deg * kPi / 180.0 : 0.0;
  for (int bus = 0; bus < yb.n_bus; ++bus) {
    double offset = side[bus] == Side::Secondary && net.transformer ? shift : 0.0;
    for (int p = 0; p < 3; ++p) {
      double ref = p == 0 ? 0.0 : (p == 1 ? -2.0 * kPi / 3.0 : 2.0 * kPi / 3.0);
      st.theta(YBus::flat(bus, p)) = base + ref + offset;
    }
  }
  return st;
}

PFSolution solve_powerflow(const YBus& yb, const InjectionSet& inj,
                           const VoltageState& start, const PFOptions& opts) {
  const JacobianLayout L = jacobian_layout(yb);
  const int n = L.n();

  // unknowns: theta and V of present non-slack entries
  std::vector<int> unknowns;  // entry indices
  for (int e = 0; e < n; ++e)
    if (!inj.is_slack[L.flat_of_entry[e]]) unknowns.push_back(e);
  const int nu = static_cast<int>(unknowns.size());
  std::vector<int> pos_of_entry(n, -1);
  for (int i = 0; i < nu; ++i) pos_of_entry[unknowns[i]] = i;

  VoltageState st = start;

  auto mismatch = [&](const VoltageState& s) {
    Eigen::VectorXd f(2 * nu);
    for (int i = 0; i < nu; ++i) {
      const int flat = L.flat_of_entry[unknowns[i]];
      auto [p, q] = injection_eval(yb, s, flat);
      f(i) = inj.p(flat) - p;
      f(nu + i) = inj.q(flat) - q;
    }
    return f;
  };

  PFSolution sol;
  Eigen::VectorXd f = mismatch(st);
  double fn = nu ? f.lpNorm<Eigen::Infinity>() : 0.0;
  int iter = 0;
  bool ok = fn <= opts.tol;
  bool singular = false;

  while (!ok && iter < opts.max_iter) {
    ++iter;
    Eigen::SparseMatrix<double> Jfull = pf_jacobian(yb, st);
    // restrict to unknown rows/cols
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < Jfull.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Jfull, c); it; ++it) {
        int re = static_cast<int>(it.row()) % n, rb = static_cast<int>(it.row()) / n;
        int ce = c % n, cb = c / n;
        int rpos = pos_of_entry[re], cpos = pos_of_entry[ce];
        if (rpos < 0 || cpos < 0) continue;
        trip.emplace_back(rb * nu + rpos, cb * nu + cpos, it.value());
      }
    Eigen::SparseMatrix<double> J(2 * nu, 2 * nu);
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      singular = true;
      break;
    }
    Eigen::VectorXd dx = lu.solve(f);

    // full step with halving backtracking on mismatch-norm increase
    double alpha = 1.0;
    VoltageState trial = st;
    double best = fn;
    for (int h = 0; h < 12; ++h) {
      trial = st;
      for (int i = 0; i < nu; ++i) {
        const int flat = L.flat_of_entry[unknowns[i]];
        trial.theta(flat) += alpha * dx(i);
        trial.v(flat) += alpha * dx(nu + i);
      }
      Eigen::VectorXd ftrial = mismatch(trial);
      double fnt = ftrial.lpNorm<Eigen::Infinity>();
      if (fnt < best || fnt <= opts.tol) {
        st = trial;
        f = ftrial;
        fn = fnt;
        break;
      }
      alpha *= 0.5;
      if (h == 11) {  // no progress at the smallest step
        st = trial;
        f = ftrial;
        fn = fnt;
      }
    }
    ok = fn <= opts.tol;
  }

  sol.state = st;
  sol.iterations = iter;
  sol.mismatch = fn;
  sol.converged = ok && !singular;
  sol.realized_p.resize(yb.size());
  sol.realized_q.resize(yb.size());
  sol.realized_p.setZero();
  sol.realized_q.setZero();
  for (int e = 0; e < n; ++e) {
    const int flat = L.flat_of_entry[e];
    auto [p, q] = injection_eval(yb, st, flat);
    sol.realized_p(flat) = p;
    sol.realized_q(flat) = q;
  }
  return sol;
}

std::vector<SnapshotLoad> read_snapshot_loads(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  std::vector<SnapshotLoad> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    SnapshotLoad s;
    s.time_h = t.num(r, "time_h");
    s.bus = t.cell(r, "bus");
    std::string ph = t.cell(r, "phase");
    if (ph != "a" && ph != "b" && ph != "c")
      throw ParseError(t.where(r) + ": phase must be a, b, or c");
    s.phase = ph == "a" ? 0 : (ph == "b" ? 1 : 2);
    s.p_kw = t.num(r, "p_kw");
    s.q_kvar = t.num(r, "q_kvar");
    out.push_back(s);
  }
  return out;
}

std::vector<VoltageRecord> read_voltage_csv(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  std::vector<VoltageRecord> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    VoltageRecord v;
    v.time_h = t.num(r, "time_h");
    v.bus = t.cell(r, "bus");
    std::string ph = t.cell(r, "phase");
    v.phase = ph == "a" ? 0 : (ph == "b" ? 1 : 2);
    v.v_pu = t.num(r, "v_pu");
    v.theta_deg = t.num(r, "theta_deg");
    out.push_back(v);
  }
  return out;
}

SnapshotReport snapshot_verify(const NetworkModel& net,
                               const std::vector<SnapshotLoad>& loads,
                               const std::vector<VoltageRecord>& reference) {
  auto [pu, bases] = to_per_unit(net);
  YBus yb = assemble_ybus(pu);
  VoltageState flat = flat_state(pu, yb);

  std::vector<double> times;
  for (const auto& l : loads)
    if (std::find(times.begin(), times.end(), l.time_h) == times.end())
      times.push_back(l.time_h);
  std::sort(times.begin(), times.end());
  if (times.empty()) times.push_back(0.0);

  int slack = pu.slack_index();
  SnapshotReport rep;
  rep.has_reference = !reference.empty();

  for (double tm : times) {
    InjectionSet inj;
    inj.p = Eigen::VectorXd::Zero(yb.size());
    inj.q = Eigen::VectorXd::Zero(yb.size());
    inj.is_slack.assign(yb.size(), 0);
    for (int p = 0; p < 3; ++p) inj.is_slack[YBus::flat(slack, p)] = 1;
    for (const auto& l : loads) {
      if (l.time_h != tm) continue;
      int b = pu.bus_index(l.bus);
      if (b < 0) throw ParseError("snapshot loads: unknown bus '" + l.bus + "'");
      inj.p(YBus::flat(b, l.phase)) -= l.p_kw / bases.s_base_kva;
      inj.q(YBus::flat(b, l.phase)) -= l.q_kvar / bases.s_base_kva;
    }

    SnapshotResult res;
    res.time_h = tm;
    res.solution = solve_powerflow(yb, inj, flat);
    if (!res.solution.converged) rep.all_converged = false;

    if (!reference.empty()) {
      double mind = 1e300, maxd = -1e300;
      int matched = 0;
      for (const auto& ref : reference) {
        if (ref.time_h != tm) continue;
        int b = pu.bus_index(ref.bus);
        if (b < 0)
          throw ParseError("reference voltages: unknown bus '" + ref.bus + "'");
        int flat_idx = YBus::flat(b, ref.phase);
        if (!yb.present[flat_idx])
          throw ParseError("reference voltages: absent phase at bus " + ref.bus);
        double dev =
            (res.solution.state.v(flat_idx) - ref.v_pu) / ref.v_pu * 100.0;
        mind = std::min(mind, dev);
        maxd = std::max(maxd, dev);
        ++matched;
      }
      if (matched == 0)
        throw ParseError("reference voltages: no rows for snapshot time " +
                         std::to_string(tm));
      res.min_dev_pct = mind;
      res.max_dev_pct = maxd;
    }
    rep.snapshots.push_back(std::move(res));
  }
  return rep;
}

void write_voltage_csv(const NetworkModel& net, const SnapshotReport& rep,
                       std::ostream& os) {
  os << "time_h,bus,phase,v_pu,theta_deg\n";
  for (const auto& snap : rep.snapshots) {
    for (std::size_t b = 0; b < net.buses.size(); ++b)
      for (int p = 0; p < 3; ++p) {
        if (!net.buses[b].phases.has(p)) continue;
        int flat_idx = YBus::flat(static_cast<int>(b), p);
        os << fmt_full(snap.time_h) << ',' << net.buses[b].id << ','
           << phase_name(p) << ',' << fmt_full(snap.solution.state.v(flat_idx))
           << ','
           << fmt_full(snap.solution.state.theta(flat_idx) * 180.0 / kPi)
           << '\n';
      }
  }
}

std::vector<VoltageViolation> check_voltage_limits(
    const NetworkModel& net, const std::vector<std::pair<double, PFSolution>>& sols,
    double lb_pu, double ub_pu) {
  std::vector<VoltageViolation> out;
  for (const auto& [time, sol] : sols) {
    for (std::size_t b = 0; b < net.buses.size(); ++b)
      for (int p = 0; p < 3; ++p) {
        if (!net.buses[b].phases.has(p)) continue;
        double v = sol.state.v(YBus::flat(static_cast<int>(b), p));
        if (v > ub_pu || v < lb_pu) {
          VoltageViolation viol;
          viol.time_h = time;
          viol.bus = net.buses[b].id;
          viol.phase = p;
          viol.v_pu = v;
          viol.bound_pu = v > ub_pu ? ub_pu : lb_pu;
          viol.breach_pu = v > ub_pu ? v - ub_pu : lb_pu - v;
          out.push_back(viol);
        }
      }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const VoltageViolation& a, const VoltageViolation& b) {
                     if (a.time_h != b.time_h) return a.time_h < b.time_h;
                     if (a.bus != b.bus) return a.bus < b.bus;
                     return a.phase < b.phase;
                   });
  return out;
}

}  // namespace desflow
