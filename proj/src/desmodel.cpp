#include "desflow/desmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace desflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string tag(const std::string& base, int s, int t, int i, int c = -1) {
  std::string out = base + "_s" + std::to_string(s) + "t" + std::to_string(t) +
                    "i" + std::to_string(i);
  if (c >= 0) out += "c" + std::to_string(c);
  return out;
}
}  // namespace

double capital_recovery_factor(double rate, double years) {
  if (rate < 0 || years < 1)
    throw std::runtime_error("capital_recovery_factor: rate >= 0, years >= 1");
  if (rate == 0) return 1.0 / years;
  double f = std::pow(1.0 + rate, years);
  return rate * f / (f - 1.0);
}

ModelIR build_des_core(const ScenarioData& sc) {
  if (sc.dt_hours <= 0) throw std::runtime_error("nonpositive timestep");
  if (sc.tech.boiler_efficiency <= 0 || sc.tech.panel_area_m2 <= 0 ||
      sc.tech.panel_capacity_kw <= 0)
    throw std::runtime_error("missing or invalid technology parameter");

  const int S = sc.n_seasons(), T = sc.n_times(), I = sc.n_loads(),
            C = sc.n_btypes();
  const double dt = sc.dt_hours;
  const double crf = capital_recovery_factor(sc.interest_rate, sc.lifetime_years);

  ModelIR m;

  // design variables, per season so the season-linking identity is explicit
  for (int i = 0; i < I; ++i)
    for (int s = 0; s < S; ++s) {
      m.add_var("panels_i" + std::to_string(i) + "s" + std::to_string(s),
                VarKind::Continuous, 0, kInf,
                {Role::PanelCount, std::int16_t(s), -1, std::int16_t(i)});
      m.add_var("boiler_i" + std::to_string(i) + "s" + std::to_string(s),
                VarKind::Continuous, 0, kInf,
                {Role::BoilerCapacity, std::int16_t(s), -1, std::int16_t(i)});
      for (int c = 0; c < C; ++c)
        m.add_var("battcap_i" + std::to_string(i) + "s" + std::to_string(s) + "c" +
                      std::to_string(c),
                  VarKind::Continuous, 0, kInf,
                  {Role::BatteryCapacity, std::int16_t(s), -1, std::int16_t(i),
                   std::int16_t(c)});
    }
  for (int i = 0; i < I; ++i)
    for (int c = 0; c < C; ++c)
      m.add_var("w_i" + std::to_string(i) + "c" + std::to_string(c),
                VarKind::Binary, 0, 1,
                {Role::BatterySelect, -1, -1, std::int16_t(i), std::int16_t(c)});

  auto opvar = [&](Role r, const char* nm, int s, int t, int i, int c = -1) {
    return m.add_var(tag(nm, s, t, i, c), VarKind::Continuous, 0, kInf,
                     {r, std::int16_t(s), std::int16_t(t), std::int16_t(i),
                      std::int16_t(c)});
  };

  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < I; ++i) {
        opvar(Role::GridImport, "egrid", s, t, i);
        opvar(Role::PvSelfUse, "epv", s, t, i);
        opvar(Role::PvExport, "esold", s, t, i);
        opvar(Role::PvTotal, "pvtot", s, t, i);
        opvar(Role::BoilerHeat, "hboil", s, t, i);
        m.add_var(tag("x", s, t, i), VarKind::Binary, 0, 1,
                  {Role::BuySell, std::int16_t(s), std::int16_t(t),
                   std::int16_t(i)});
        for (int c = 0; c < C; ++c) {
          opvar(Role::ChargeFromPv, "echpv", s, t, i, c);
          opvar(Role::ChargeFromGrid, "echgrid", s, t, i, c);
          opvar(Role::Charge, "ech", s, t, i, c);
          opvar(Role::Discharge, "edisch", s, t, i, c);
          opvar(Role::StoredEnergy, "estored", s, t, i, c);
          m.add_var(tag("q", s, t, i, c), VarKind::Binary, 0, 1,
                    {Role::ChargeBinary, std::int16_t(s), std::int16_t(t),
                     std::int16_t(i), std::int16_t(c)});
        }
      }

  auto key = [](Role r, int s, int t, int i, int c = -1) {
    return SemKey{r, std::int16_t(s), std::int16_t(t), std::int16_t(i),
                  std::int16_t(c)};
  };

  // capacity linking across seasons
  for (int i = 0; i < I; ++i)
    for (int s = 1; s < S; ++s) {
      auto link = [&](Role r, int c) {
        m.add_row({{{m.var_at(key(r, s, -1, i, c)), 1.0},
                    {m.var_at(key(r, s - 1, -1, i, c)), -1.0}},
                   Sense::EQ,
                   0.0,
                   "eq6_capacity_link"});
      };
      link(Role::PanelCount, -1);
      link(Role::BoilerCapacity, -1);
      for (int c = 0; c < C; ++c) link(Role::BatteryCapacity, c);
    }

  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < I; ++i) {
        const double eload = sc.elec[s][t][i];
        const double hload = sc.heat[s][t][i];

        // electricity balance: demand = grid + pv self-use + discharge
        LinRow bal;
        bal.terms = {{m.var_at(key(Role::GridImport, s, t, i)), 1.0},
                     {m.var_at(key(Role::PvSelfUse, s, t, i)), 1.0}};
        for (int c = 0; c < C; ++c)
          bal.terms.push_back({m.var_at(key(Role::Discharge, s, t, i, c)), 1.0});
        bal.sense = Sense::EQ;
        bal.rhs = eload;
        bal.family = "eq7_elec_balance";
        m.add_row(std::move(bal));

        m.add_row({{{m.var_at(key(Role::BoilerHeat, s, t, i)), 1.0}},
                   Sense::EQ,
                   hload,
                   "eq8_heat_balance"});

        // buy/sell switching
        m.add_row({{{m.var_at(key(Role::GridImport, s, t, i)), 1.0},
                    {m.var_at(key(Role::BuySell, s, t, i)), eload}},
                   Sense::LE,
                   eload,
                   "eq9_buy"});
        m.add_row({{{m.var_at(key(Role::PvExport, s, t, i)), 1.0},
                    {m.var_at(key(Role::BuySell, s, t, i)), -kBigM}},
                   Sense::LE,
                   0.0,
                   "eq10_sell"});

        // PV generation cap and split identity
        const double pv_gain =
            sc.tech.pv_efficiency * sc.tech.panel_area_m2 * sc.irradiance[s][t];
        m.add_row({{{m.var_at(key(Role::PvTotal, s, t, i)), 1.0},
                    {m.var_at(key(Role::PanelCount, s, -1, i)), -pv_gain}},
                   Sense::LE,
                   0.0,
                   "pv_limit"});
        {
          LinRow split;
          split.terms = {{m.var_at(key(Role::PvTotal, s, t, i)), 1.0},
                         {m.var_at(key(Role::PvSelfUse, s, t, i)), -1.0},
                         {m.var_at(key(Role::PvExport, s, t, i)), -1.0}};
          for (int c = 0; c < C; ++c)
            split.terms.push_back(
                {m.var_at(key(Role::ChargeFromPv, s, t, i, c)), -1.0});
          split.sense = Sense::EQ;
          split.rhs = 0.0;
          split.family = "pv_split";
          m.add_row(std::move(split));
        }

        m.add_row({{{m.var_at(key(Role::BoilerHeat, s, t, i)), 1.0},
                    {m.var_at(key(Role::BoilerCapacity, s, -1, i)), -1.0}},
                   Sense::LE,
                   0.0,
                   "boiler_cap"});

        for (int c = 0; c < C; ++c) {
          const BatteryTech& bat = sc.tech.batteries[c];
          // aggregate charge
          m.add_row({{{m.var_at(key(Role::Charge, s, t, i, c)), 1.0},
                      {m.var_at(key(Role::ChargeFromPv, s, t, i, c)), -1.0},
                      {m.var_at(key(Role::ChargeFromGrid, s, t, i, c)), -1.0}},
                     Sense::EQ,
                     0.0,
                     "charge_split"});

          // storage dynamics; stored level starts at zero
          LinRow dyn;
          dyn.terms = {{m.var_at(key(Role::StoredEnergy, s, t, i, c)), 1.0},
                       {m.var_at(key(Role::Charge, s, t, i, c)),
                        -bat.eta_ch * dt},
                       {m.var_at(key(Role::Discharge, s, t, i, c)),
                        dt / bat.eta_disch}};
          if (t > 0)
            dyn.terms.push_back(
                {m.var_at(key(Role::StoredEnergy, s, t - 1, i, c)), -1.0});
          dyn.sense = Sense::EQ;
          dyn.rhs = 0.0;
          dyn.family = "eq13_14_storage";
          m.add_row(std::move(dyn));

          m.add_row({{{m.var_at(key(Role::StoredEnergy, s, t, i, c)), 1.0},
                      {m.var_at(key(Role::BatteryCapacity, s, -1, i, c)),
                       -bat.soc_max}},
                     Sense::LE,
                     0.0,
                     "eq15_soc"});
          m.add_row({{{m.var_at(key(Role::StoredEnergy, s, t, i, c)), -1.0},
                      {m.var_at(key(Role::BatteryCapacity, s, -1, i, c)),
                       1.0 - bat.dod_max}},
                     Sense::LE,
                     0.0,
                     "eq16_dod"});

          // charge/discharge switching
          m.add_row({{{m.var_at(key(Role::Charge, s, t, i, c)), 1.0},
                      {m.var_at(key(Role::ChargeBinary, s, t, i, c)), -kBigM}},
                     Sense::LE,
                     0.0,
                     "eq17_charge_bigM"});
          m.add_row({{{m.var_at(key(Role::Discharge, s, t, i, c)), 1.0},
                      {m.var_at(key(Role::ChargeBinary, s, t, i, c)), kBigM}},
                     Sense::LE,
                     kBigM,
                     "eq18_discharge_bigM"});
        }
      }

  // battery-type selection
  for (int i = 0; i < I; ++i) {
    LinRow one;
    for (int c = 0; c < C; ++c)
      one.terms.push_back(
          {m.var_at({Role::BatterySelect, -1, -1, std::int16_t(i),
                     std::int16_t(c)}),
           1.0});
    one.sense = Sense::LE;
    one.rhs = 1.0;
    one.family = "eq20_one_type";
    m.add_row(std::move(one));
    for (int s = 0; s < S; ++s)
      for (int c = 0; c < C; ++c)
        m.add_row({{{m.var_at(key(Role::BatteryCapacity, s, -1, i, c)), 1.0},
                    {m.var_at({Role::BatterySelect, -1, -1, std::int16_t(i),
                               std::int16_t(c)}),
                     -kBigM}},
                   Sense::LE,
                   0.0,
                   "eq21_select_bigM"});
  }

  // installation space limits
  for (int i = 0; i < I; ++i)
    for (int s = 0; s < S; ++s) {
      m.add_row({{{m.var_at(key(Role::PanelCount, s, -1, i)),
                   sc.tech.panel_area_m2}},
                 Sense::LE,
                 sc.roof_of(sc.loads[i]),
                 "roof_area"});
      for (int c = 0; c < C; ++c)
        m.add_row(
            {{{m.var_at(key(Role::BatteryCapacity, s, -1, i, c)), 1.0}},
             Sense::LE,
             sc.volume_of(sc.loads[i]) *
                 sc.tech.batteries[c].energy_density_kwh_m3,
             "battery_volume"});
    }

  // objective: annualized investment + fixed operation + seasonal energy
  // costs minus feed-in income
  auto add_obj = [&](int var, double coef) {
    if (coef != 0) m.objective.push_back({var, coef});
  };
  for (int i = 0; i < I; ++i) {
    add_obj(m.var_at(key(Role::PanelCount, 0, -1, i)),
            crf * sc.tech.pv_cost_per_panel +
                sc.tech.pv_fixed_op_cost * sc.tech.panel_capacity_kw);
    add_obj(m.var_at(key(Role::BoilerCapacity, 0, -1, i)),
            crf * sc.tech.boiler_cost_per_kw);
    for (int c = 0; c < C; ++c)
      add_obj(m.var_at(key(Role::BatteryCapacity, 0, -1, i, c)),
              crf * sc.tech.batteries[c].cost_per_kwh +
                  sc.tech.batteries[c].op_cost_per_kwh_yr);
  }
  for (int s = 0; s < S; ++s) {
    const double days = sc.days_per_season[s];
    for (int t = 0; t < T; ++t) {
      const double price = sc.tariff.price_at(sc.time_h[t]);
      for (int i = 0; i < I; ++i) {
        add_obj(m.var_at(key(Role::GridImport, s, t, i)), days * dt * price);
        for (int c = 0; c < C; ++c)
          add_obj(m.var_at(key(Role::ChargeFromGrid, s, t, i, c)),
                  days * dt * price);
        add_obj(m.var_at(key(Role::BoilerHeat, s, t, i)),
                days * dt * sc.tariff.gas_price / sc.tech.boiler_efficiency);
        add_obj(m.var_at(key(Role::PvExport, s, t, i)),
                -days * dt * sc.tariff.export_tariff);
        add_obj(m.var_at(key(Role::PvTotal, s, t, i)),
                -days * dt * sc.tariff.generation_tariff);
      }
    }
  }

  return m;
}

std::vector<int> house_bus_map(const NetworkModel& net, const ScenarioData& sc) {
  std::vector<int> map;
  for (const auto& load : sc.loads) {
    int b = net.bus_index(load);
    if (b < 0) throw std::runtime_error("scenario load '" + load +
                                        "' is not a bus in the network");
    if (net.buses[b].kind != BusKind::Load)
      throw std::runtime_error("scenario load '" + load + "' is not a load bus");
    map.push_back(b);
  }
  return map;
}

void attach_dc_network(ModelIR& m, const NetworkModel& net,
                       const std::vector<DcBranch>& dc, const ScenarioData& sc) {
  const int S = sc.n_seasons(), T = sc.n_times();
  const int N = static_cast<int>(net.buses.size());
  const int slack = net.slack_index();
  const double sbase = net.s_base_kva;
  std::vector<int> hbus = house_bus_map(net, sc);

  for (const auto& b : dc)
    if (b.from < 0 || b.to < 0 || b.from >= N || b.to >= N)
      throw std::runtime_error("dc susceptance table references unknown bus");
  // every bus must appear in some branch, otherwise it has no flow equation
  {
    std::vector<char> seen(N, 0);
    for (const auto& b : dc) seen[b.from] = seen[b.to] = 1;
    for (int n = 0; n < N; ++n)
      if (!seen[n])
        throw std::runtime_error("bus " + net.buses[n].id +
                                 " has no susceptance data");
  }

  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) {
      std::vector<int> th(N);
      for (int n = 0; n < N; ++n) {
        double lo = n == slack ? 0.0 : -kInf;
        double hi = n == slack ? 0.0 : kInf;
        th[n] = m.add_var("th_" + net.buses[n].id + "_s" + std::to_string(s) +
                              "t" + std::to_string(t),
                          VarKind::Continuous, lo, hi,
                          {Role::VoltageAngle, std::int16_t(s), std::int16_t(t),
                           -1, -1, std::int16_t(n), -1});
      }
      int pslack = m.add_var(
          "pslack_s" + std::to_string(s) + "t" + std::to_string(t),
          VarKind::Continuous, -kInf, kInf,
          {Role::ActiveInjection, std::int16_t(s), std::int16_t(t), -1, -1,
           std::int16_t(slack), -1});

      // per-bus angle coefficients of the flow expression
      std::vector<std::map<int, double>> coef(N);
      for (const auto& br : dc) {
        coef[br.from][th[br.from]] += br.b_pu;
        coef[br.from][th[br.to]] -= br.b_pu;
        coef[br.to][th[br.to]] += br.b_pu;
        coef[br.to][th[br.from]] -= br.b_pu;
      }

      for (int n = 0; n < N; ++n) {
        LinRow row;
        for (const auto& [var, cf] : coef[n])
          if (cf != 0) row.terms.push_back({var, cf});
        row.sense = Sense::EQ;
        row.rhs = 0.0;
        if (n == slack) {
          row.terms.push_back({pslack, -1.0});
          row.family = "eq22_dc_slack";
        } else {
          auto hit = std::find(hbus.begin(), hbus.end(), n);
          if (hit != hbus.end()) {
            int i = static_cast<int>(hit - hbus.begin());
            SemKey k;
            k.season = std::int16_t(s);
            k.time = std::int16_t(t);
            k.house = std::int16_t(i);
            k.role = Role::PvExport;
            row.terms.push_back({m.var_at(k), -1.0 / sbase});
            k.role = Role::GridImport;
            row.terms.push_back({m.var_at(k), 1.0 / sbase});
            for (int c = 0; c < sc.n_btypes(); ++c) {
              k.role = Role::ChargeFromGrid;
              k.btype = std::int16_t(c);
              row.terms.push_back({m.var_at(k), 1.0 / sbase});
            }
            row.family = "eq22_dc_flow";
          } else {
            row.family = "eq22_dc_connector";
          }
        }
        m.add_row(std::move(row));
      }
    }
}

namespace {

/// Shared machinery for the multiphase and balanced attachments. The
/// balanced view is a YBus with only phase a present.
void attach_ac(ModelIR& m, const NetworkModel& net,
               std::shared_ptr<const YBus> ybus, const ScenarioData& sc,
               bool multiphase) {
  const int S = sc.n_seasons(), T = sc.n_times();
  const int slack = net.slack_index();
  const double sbase = net.s_base_kva;
  const double tanphi = std::tan(std::acos(sc.power_factor));
  std::vector<int> hbus = house_bus_map(net, sc);
  std::vector<Side> side = bus_sides(net);

  for (int i = 0; i < sc.n_loads(); ++i) {
    const BusRecord& b = net.buses[hbus[i]];
    if (multiphase && b.psi_phase() < 0)
      throw std::runtime_error("load bus " + b.id +
                               " lacks a one-hot phase indicator");
  }

  const double vub = net.v_ub_frac, vlb = net.v_lb_frac;
  const double base_angle = net.source_angle_deg * kPi / 180.0;
  const double shift =
      net.transformer ? net.transformer->shift_deg * kPi / 180.0 : 0.0;

  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) {
      PowerFlowBlock blk;
      blk.ybus = ybus;
      blk.season = s;
      blk.time = t;
      blk.v_var.assign(ybus->size(), -1);
      blk.th_var.assign(ybus->size(), -1);
      std::vector<int> pvar(ybus->size(), -1), qvar(ybus->size(), -1);

      for (int bus = 0; bus < ybus->n_bus; ++bus)
        for (int ph = 0; ph < 3; ++ph) {
          int k = YBus::flat(bus, ph);
          if (!ybus->present[k]) continue;
          std::string sfx = "_" + net.buses[bus].id + std::string(phase_name(ph)) +
                            "_s" + std::to_string(s) + "t" + std::to_string(t);
          const bool pinned = bus == slack;
          double ref = ph == 0 ? 0.0 : (ph == 1 ? -2 * kPi / 3 : 2 * kPi / 3);
          double th0 = base_angle + ref +
                       (net.transformer && side[bus] == Side::Secondary ? shift
                                                                        : 0.0);
          blk.v_var[k] = m.add_var(
              "v" + sfx, VarKind::Continuous, pinned ? net.source_v_pu : vlb,
              pinned ? net.source_v_pu : vub,
              {Role::VoltageMag, std::int16_t(s), std::int16_t(t), -1, -1,
               std::int16_t(bus), std::int16_t(ph)});
          blk.th_var[k] = m.add_var(
              "th" + sfx, VarKind::Continuous, pinned ? th0 : -kInf,
              pinned ? th0 : kInf,
              {Role::VoltageAngle, std::int16_t(s), std::int16_t(t), -1, -1,
               std::int16_t(bus), std::int16_t(ph)});
          pvar[k] = m.add_var("p" + sfx, VarKind::Continuous, -kInf, kInf,
                              {Role::ActiveInjection, std::int16_t(s),
                               std::int16_t(t), -1, -1, std::int16_t(bus),
                               std::int16_t(ph)});
          qvar[k] = m.add_var("q" + sfx, VarKind::Continuous, -kInf, kInf,
                              {Role::ReactiveInjection, std::int16_t(s),
                               std::int16_t(t), -1, -1, std::int16_t(bus),
                               std::int16_t(ph)});
          blk.equations.push_back({pvar[k], k, false});
          blk.equations.push_back({qvar[k], k, true});
        }

      for (int bus = 0; bus < ybus->n_bus; ++bus) {
        if (bus == slack) continue;
        auto hit = std::find(hbus.begin(), hbus.end(), bus);
        const bool is_house = hit != hbus.end();
        const int i = is_house ? static_cast<int>(hit - hbus.begin()) : -1;
        for (int ph = 0; ph < 3; ++ph) {
          int k = YBus::flat(bus, ph);
          if (!ybus->present[k]) continue;
          if (!is_house) {
            m.add_row({{{pvar[k], 1.0}}, Sense::EQ, 0.0, "eq32_33_connector"});
            m.add_row({{{qvar[k], 1.0}}, Sense::EQ, 0.0, "eq32_33_connector"});
            continue;
          }
          // house linking; the balanced view maps the whole house onto the
          // single modelled phase
          double psi = multiphase ? net.buses[bus].psi[ph] : 1.0;
          LinRow prow;
          prow.terms.push_back({pvar[k], 1.0});
          SemKey hk;
          hk.season = std::int16_t(s);
          hk.time = std::int16_t(t);
          hk.house = std::int16_t(i);
          if (psi != 0) {
            hk.role = Role::PvExport;
            prow.terms.push_back({m.var_at(hk), -psi / sbase});
            hk.role = Role::GridImport;
            prow.terms.push_back({m.var_at(hk), psi / sbase});
            for (int c = 0; c < sc.n_btypes(); ++c) {
              hk.role = Role::ChargeFromGrid;
              hk.btype = std::int16_t(c);
              prow.terms.push_back({m.var_at(hk), psi / sbase});
            }
          }
          prow.sense = Sense::EQ;
          prow.rhs = 0.0;
          prow.family = "eq34_p_link";
          m.add_row(std::move(prow));

          // constant-power-factor reactive load, no reactive generation
          double qload = psi * sc.elec[s][t][i] * tanphi / sbase;
          m.add_row({{{qvar[k], 1.0}}, Sense::EQ, -qload, "eq35_q_link"});
        }
      }

      m.pf_blocks.push_back(std::move(blk));
    }
}

}  // namespace

void attach_mopf(ModelIR& m, const NetworkModel& net,
                 std::shared_ptr<const YBus> ybus, const ScenarioData& sc) {
  if (!net.per_unit) throw std::runtime_error("attach_mopf needs per-unit network");
  attach_ac(m, net, std::move(ybus), sc, true);
}

void attach_balanced_opf(ModelIR& m, const NetworkModel& net,
                         const ScenarioData& sc) {
  if (!net.per_unit)
    throw std::runtime_error("attach_balanced_opf needs per-unit network");
  // single-phase equivalent YBus on phase a
  auto yb = std::make_shared<YBus>();
  yb->n_bus = static_cast<int>(net.buses.size());
  yb->present.assign(3 * yb->n_bus, 0);
  for (int n = 0; n < yb->n_bus; ++n) yb->present[YBus::flat(n, 0)] = 1;

  std::vector<Eigen::Triplet<Complex>> trip;
  auto add = [&](int n, int mth, Complex v) {
    trip.emplace_back(YBus::flat(n, 0), YBus::flat(mth, 0), v);
  };
  for (const auto& br : dc_susceptance(net)) {
    Complex y = 1.0 / br.z_eq;
    add(br.from, br.from, y);
    add(br.to, br.to, y);
    add(br.from, br.to, -y);
    add(br.to, br.from, -y);
  }
  if (net.transformer) {
    // the dc table already carries the transformer branch; add its shunt
    Complex sh(net.transformer->shunt_pu, 0);
    add(net.bus_index(net.xfmr_primary), net.bus_index(net.xfmr_primary), sh);
    add(net.bus_index(net.xfmr_secondary), net.bus_index(net.xfmr_secondary), sh);
  }
  yb->y.resize(3 * yb->n_bus, 3 * yb->n_bus);
  yb->y.setFromTriplets(trip.begin(), trip.end());
  yb->y.makeCompressed();

  attach_ac(m, net, yb, sc, false);
}

ModelIR reformulate_complementarity(const ModelIR& m, double epsilon) {
  if (!m.pairs.empty())
    throw std::runtime_error("model already carries complementarity pairs");
  if (epsilon < 0) throw std::runtime_error("epsilon must be nonnegative");

  ModelIR out;
  out.epsilon = epsilon;
  out.obj_constant = m.obj_constant;

  // drop the buy/sell and charge/discharge binaries, keep everything else
  std::vector<int> remap(m.vars.size(), -1);
  for (int v = 0; v < m.n_vars(); ++v) {
    Role r = m.vars[v].key.role;
    if (r == Role::BuySell || r == Role::ChargeBinary) continue;
    remap[v] = out.add_var(m.vars[v].name, m.vars[v].kind, m.vars[v].lb,
                           m.vars[v].ub, m.vars[v].key);
  }

  static const std::set<std::string> kDropped = {"eq10_sell", "eq17_charge_bigM",
                                                 "eq18_discharge_bigM"};
  for (const auto& row : m.rows) {
    if (kDropped.count(row.family)) continue;
    LinRow nr;
    nr.sense = row.sense;
    nr.rhs = row.rhs;
    if (row.family == "eq9_buy") {
      // purchase cap survives without the binary term
      nr.family = "eq12_purchase_cap";
      for (const auto& tm : row.terms)
        if (remap[tm.var] >= 0) nr.terms.push_back({remap[tm.var], tm.coef});
    } else {
      nr.family = row.family;
      for (const auto& tm : row.terms) {
        if (remap[tm.var] < 0)
          throw std::runtime_error("row " + row.family +
                                   " references a removed binary");
        nr.terms.push_back({remap[tm.var], tm.coef});
      }
    }
    out.rows.push_back(std::move(nr));
  }

  for (const auto& tm : m.objective) {
    if (remap[tm.var] < 0)
      throw std::runtime_error("objective references a removed binary");
    out.objective.push_back({remap[tm.var], tm.coef});
  }

  for (const auto& blk : m.pf_blocks) {
    PowerFlowBlock nb = blk;
    auto map_vec = [&](std::vector<int>& v) {
      for (auto& idx : v)
        if (idx >= 0) idx = remap[idx];
    };
    map_vec(nb.v_var);
    map_vec(nb.th_var);
    for (auto& eq : nb.equations) eq.power_var = remap[eq.power_var];
    out.pf_blocks.push_back(std::move(nb));
  }

  // complementarity pairs: (grid import, export) and (charge, discharge)
  for (int v = 0; v < m.n_vars(); ++v) {
    const SemKey& k = m.vars[v].key;
    if (k.role == Role::GridImport) {
      SemKey sold = k;
      sold.role = Role::PvExport;
      out.pairs.push_back({remap[v], remap[m.var_at(sold)]});
    } else if (k.role == Role::Charge) {
      SemKey dis = k;
      dis.role = Role::Discharge;
      out.pairs.push_back({remap[v], remap[m.var_at(dis)]});
    }
  }
  return out;
}

std::map<SemKey, double> collect_assignment(const ModelIR& m,
                                            const Eigen::VectorXd& x,
                                            FixScope scope) {
  std::set<Role> roles = {Role::BuySell, Role::ChargeBinary, Role::BatterySelect};
  if (scope == FixScope::DesignAndBinaries) {
    roles.insert(Role::PanelCount);
    roles.insert(Role::BatteryCapacity);
    roles.insert(Role::BoilerCapacity);
  }
  std::map<SemKey, double> out;
  for (int v = 0; v < m.n_vars(); ++v)
    if (roles.count(m.vars[v].key.role)) out[m.vars[v].key] = x(v);
  return out;
}

ModelIR fix_variables(const ModelIR& m, const std::map<SemKey, double>& assignment,
                      FixScope scope) {
  std::set<Role> roles = {Role::BuySell, Role::ChargeBinary, Role::BatterySelect};
  if (scope == FixScope::DesignAndBinaries) {
    roles.insert(Role::PanelCount);
    roles.insert(Role::BatteryCapacity);
    roles.insert(Role::BoilerCapacity);
  }
  ModelIR out = m;
  for (auto& v : out.vars) {
    if (!roles.count(v.key.role)) continue;
    auto it = assignment.find(v.key);
    if (it == assignment.end())
      throw std::runtime_error("assignment does not cover variable " + v.name);
    double val = it->second;
    if (v.kind == VarKind::Binary) {
      double r = std::round(val);
      if (std::abs(val - r) > 1e-5)
        throw std::runtime_error("binary assignment for " + v.name +
                                 " is fractional");
      val = r;
    }
    if (val < v.lb - 1e-9 || val > v.ub + 1e-9)
      throw std::runtime_error("assignment for " + v.name + " outside bounds");
    v.lb = v.ub = val;
  }
  return out;
}

std::tuple<DesignDecisionSet, OperatingSchedule, CostBreakdown> extract_solution(
    const ModelIR& m, const ScenarioData& sc, const Eigen::VectorXd& x) {
  if (x.size() != m.n_vars())
    throw std::runtime_error("primal values do not cover all variables");
  const int S = sc.n_seasons(), T = sc.n_times(), I = sc.n_loads(),
            C = sc.n_btypes();
  const double dt = sc.dt_hours;
  const double crf = capital_recovery_factor(sc.interest_rate, sc.lifetime_years);

  auto val = [&](Role r, int s, int t, int i, int c = -1) {
    return x(m.var_at({r, std::int16_t(s), std::int16_t(t), std::int16_t(i),
                       std::int16_t(c)}));
  };

  DesignDecisionSet design;
  for (int i = 0; i < I; ++i) {
    HouseDesign h;
    h.house = sc.loads[i];
    h.panels = val(Role::PanelCount, 0, -1, i);
    h.pv_cap_kw = h.panels * sc.tech.panel_capacity_kw;
    h.boiler_cap_kw = val(Role::BoilerCapacity, 0, -1, i);
    for (int c = 0; c < C; ++c) {
      h.battery_kwh.push_back(val(Role::BatteryCapacity, 0, -1, i, c));
      h.selected.push_back(
          x(m.var_at({Role::BatterySelect, -1, -1, std::int16_t(i),
                      std::int16_t(c)})));
    }
    design.houses.push_back(std::move(h));
  }

  OperatingSchedule sched;
  auto alloc3 = [&](auto& a) {
    a.assign(S, std::vector<std::vector<double>>(T, std::vector<double>(I, 0)));
  };
  auto alloc4 = [&](auto& a) {
    a.assign(S, std::vector<std::vector<std::vector<double>>>(
                    T, std::vector<std::vector<double>>(
                           I, std::vector<double>(C, 0))));
  };
  alloc3(sched.e_grid);
  alloc3(sched.e_pv);
  alloc3(sched.e_sold);
  alloc3(sched.h_boiler);
  alloc3(sched.pv_total);
  alloc4(sched.e_ch_pv);
  alloc4(sched.e_ch_grid);
  alloc4(sched.e_ch);
  alloc4(sched.e_disch);
  alloc4(sched.e_stored);

  CostBreakdown costs;
  for (int i = 0; i < I; ++i) {
    costs.pv_investment += crf * sc.tech.pv_cost_per_panel * design.houses[i].panels;
    costs.pv_operation += sc.tech.pv_fixed_op_cost * design.houses[i].pv_cap_kw;
    costs.boiler_investment +=
        crf * sc.tech.boiler_cost_per_kw * design.houses[i].boiler_cap_kw;
    for (int c = 0; c < C; ++c) {
      costs.battery_investment += crf * sc.tech.batteries[c].cost_per_kwh *
                                  design.houses[i].battery_kwh[c];
      costs.battery_operation += sc.tech.batteries[c].op_cost_per_kwh_yr *
                                 design.houses[i].battery_kwh[c];
    }
  }

  for (int s = 0; s < S; ++s) {
    const double days = sc.days_per_season[s];
    for (int t = 0; t < T; ++t) {
      const double price = sc.tariff.price_at(sc.time_h[t]);
      for (int i = 0; i < I; ++i) {
        double egrid = val(Role::GridImport, s, t, i);
        double epv = val(Role::PvSelfUse, s, t, i);
        double esold = val(Role::PvExport, s, t, i);
        double hboil = val(Role::BoilerHeat, s, t, i);
        double pvtot = val(Role::PvTotal, s, t, i);
        sched.e_grid[s][t][i] = egrid;
        sched.e_pv[s][t][i] = epv;
        sched.e_sold[s][t][i] = esold;
        sched.h_boiler[s][t][i] = hboil;
        sched.pv_total[s][t][i] = pvtot;

        double grid_charge = 0;
        for (int c = 0; c < C; ++c) {
          sched.e_ch_pv[s][t][i][c] = val(Role::ChargeFromPv, s, t, i, c);
          sched.e_ch_grid[s][t][i][c] = val(Role::ChargeFromGrid, s, t, i, c);
          sched.e_ch[s][t][i][c] = val(Role::Charge, s, t, i, c);
          sched.e_disch[s][t][i][c] = val(Role::Discharge, s, t, i, c);
          sched.e_stored[s][t][i][c] = val(Role::StoredEnergy, s, t, i, c);
          grid_charge += sched.e_ch_grid[s][t][i][c];
        }

        costs.grid_cost += days * dt * price * (egrid + grid_charge);
        costs.boiler_operation +=
            days * dt * sc.tariff.gas_price * hboil / sc.tech.boiler_efficiency;
        costs.export_income += days * dt * sc.tariff.export_tariff * esold;
        costs.generation_income +=
            days * dt * sc.tariff.generation_tariff * pvtot;
      }
    }
  }

  double obj = m.eval_objective(x);
  if (std::abs(costs.total() - obj) > 1e-6)
    throw std::runtime_error(
        "cost identity violated: breakdown total " + std::to_string(costs.total()) +
        " vs objective " + std::to_string(obj));
  return {std::move(design), std::move(sched), costs};
}

}  // namespace desflow
