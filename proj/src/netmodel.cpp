#include "desflow/netmodel.hpp"

#include "desflow/csvio.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace desflow {

int NetworkModel::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

int NetworkModel::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
  return -1;
}

std::vector<int> NetworkModel::load_bus_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].kind == BusKind::Load) out.push_back(static_cast<int>(i));
  return out;
}

const LineCode& NetworkModel::code_of(const LineRecord& line) const {
  auto it = linecodes.find(line.linecode);
  if (it == linecodes.end())
    throw ParseError("unknown linecode '" + line.linecode + "'");
  return it->second;
}

int NetworkModel::degree(int bus) const {
  const std::string& id = buses[bus].id;
  int d = 0;
  for (const auto& l : lines)
    if (l.from == id || l.to == id) ++d;
  if (transformer && (xfmr_primary == id || xfmr_secondary == id)) ++d;
  return d;
}

namespace {

BusKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "slack") return BusKind::Slack;
  if (s == "connector") return BusKind::Connector;
  if (s == "load") return BusKind::Load;
  throw ParseError(where + ": unknown bus kind '" + s + "'");
}

const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::Slack: return "slack";
    case BusKind::Connector: return "connector";
    default: return "load";
  }
}

XfmrConnection parse_connection(const std::string& s, const std::string& where) {
  if (s == "delta-wye-g") return XfmrConnection::DeltaWyeG;
  if (s == "wye-g-wye-g") return XfmrConnection::WyeGWyeG;
  throw ParseError(where + ": unsupported transformer connection '" + s + "'");
}

}  // namespace

NetworkModel parse_network(const std::string& root) {
  NetworkModel net;

  CsvTable buses = CsvTable::read_file(root + "/buses.csv");
  for (std::size_t r = 0; r < buses.rows(); ++r) {
    BusRecord b;
    b.id = buses.cell(r, "id");
    b.kind = parse_kind(buses.cell(r, "kind"), buses.where(r));
    b.phases.on = {buses.num(r, "phase_a") != 0, buses.num(r, "phase_b") != 0,
                   buses.num(r, "phase_c") != 0};
    b.psi = {buses.num(r, "psi_a"), buses.num(r, "psi_b"), buses.num(r, "psi_c")};
    if (net.bus_index(b.id) >= 0)
      throw ParseError(buses.where(r) + ": duplicate bus id '" + b.id + "'");
    net.buses.push_back(std::move(b));
  }

  CsvTable codes = CsvTable::read_file(root + "/linecodes.csv");
  static const char* rc[9] = {"raa", "rab", "rac", "rab2", "rbb", "rbc",
                              "rac2", "rbc2", "rcc"};
  (void)rc;
  for (std::size_t r = 0; r < codes.rows(); ++r) {
    LineCode c;
    c.name = codes.cell(r, "name");
    const char* rn[6] = {"raa", "rab", "rac", "rbb", "rbc", "rcc"};
    const char* xn[6] = {"xaa", "xab", "xac", "xbb", "xbc", "xcc"};
    double rv[6], xv[6];
    for (int k = 0; k < 6; ++k) {
      rv[k] = codes.num(r, rn[k]);
      xv[k] = codes.num(r, xn[k]);
    }
    c.r << rv[0], rv[1], rv[2], rv[1], rv[3], rv[4], rv[2], rv[4], rv[5];
    c.x << xv[0], xv[1], xv[2], xv[1], xv[3], xv[4], xv[2], xv[4], xv[5];
    for (int p = 0; p < 3; ++p) c.phases.on[p] = c.r(p, p) != 0 || c.x(p, p) != 0;
    if (net.linecodes.count(c.name))
      throw ParseError(codes.where(r) + ": duplicate linecode '" + c.name + "'");
    net.linecodes[c.name] = std::move(c);
  }

  CsvTable lines = CsvTable::read_file(root + "/lines.csv");
  for (std::size_t r = 0; r < lines.rows(); ++r) {
    LineRecord l;
    l.from = lines.cell(r, "from");
    l.to = lines.cell(r, "to");
    l.length_km = lines.num(r, "length_km");
    l.linecode = lines.cell(r, "linecode");
    int fi = net.bus_index(l.from), ti = net.bus_index(l.to);
    if (fi < 0)
      throw ParseError(lines.where(r) + ": line endpoint '" + l.from +
                       "' is not a bus");
    if (ti < 0)
      throw ParseError(lines.where(r) + ": line endpoint '" + l.to +
                       "' is not a bus");
    auto it = net.linecodes.find(l.linecode);
    if (it == net.linecodes.end())
      throw ParseError(lines.where(r) + ": unknown linecode '" + l.linecode + "'");
    l.phases = it->second.phases;
    net.lines.push_back(std::move(l));
  }

  CsvTable xf = CsvTable::read_file(root + "/transformer.csv");
  if (xf.rows() > 1)
    throw ParseError(root + "/transformer.csv: at most one transformer supported");
  if (xf.rows() == 1) {
    TransformerSpec t;
    t.connection = parse_connection(xf.cell(0, "connection"), xf.where(0));
    t.kva = xf.num(0, "kva");
    t.v_primary_ll = xf.num(0, "v_primary_ll");
    t.v_secondary_ll = xf.num(0, "v_secondary_ll");
    t.r_pu = xf.num(0, "r_pu");
    t.x_pu = xf.num(0, "x_pu");
    t.tap_p = xf.num(0, "tap_p");
    t.tap_s = xf.num(0, "tap_s");
    t.shift_deg = xf.num(0, "shift_deg");
    t.shunt_pu = xf.num(0, "shunt_pu");
    net.transformer = t;
    // Terminal convention: primary is the slack bus, secondary the first
    // non-slack bus in file order.
    int si = net.slack_index();
    if (si < 0) throw ParseError(root + "/buses.csv: no slack bus declared");
    net.xfmr_primary = net.buses[si].id;
    for (const auto& b : net.buses)
      if (b.kind != BusKind::Slack) {
        net.xfmr_secondary = b.id;
        break;
      }
    if (net.xfmr_secondary.empty())
      throw ParseError(root + ": transformer present but no secondary bus");
    net.v_ll_base_primary = t.v_primary_ll;
    net.v_ll_base_secondary = t.v_secondary_ll;
    net.s_base_kva = t.kva / 3.0;
  } else {
    // No transformer: single-sided network, nominal 416 V base.
    net.v_ll_base_primary = net.v_ll_base_secondary = 416.0;
    net.s_base_kva = 100.0 / 3.0;
  }

  CsvTable src = CsvTable::read_file(root + "/source.csv");
  if (src.rows() != 1)
    throw ParseError(root + "/source.csv: expected exactly one row");
  net.source_v_pu = src.num(0, "v_pu");
  net.source_angle_deg = src.num(0, "angle_deg");

  return net;
}

void write_network(const NetworkModel& net, const std::string& dir) {
  {
    std::ofstream f(dir + "/buses.csv");
    f << "id,kind,phase_a,phase_b,phase_c,psi_a,psi_b,psi_c\n";
    for (const auto& b : net.buses) {
      f << b.id << ',' << kind_name(b.kind);
      for (int p = 0; p < 3; ++p) f << ',' << (b.phases.on[p] ? 1 : 0);
      for (int p = 0; p < 3; ++p) f << ',' << fmt_full(b.psi[p]);
      f << '\n';
    }
  }
  {
    std::ofstream f(dir + "/linecodes.csv");
    f << "name,raa,rab,rac,rbb,rbc,rcc,xaa,xab,xac,xbb,xbc,xcc\n";
    for (const auto& [name, c] : net.linecodes) {
      f << name;
      const int idx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
      for (auto& ij : idx) f << ',' << fmt_full(c.r(ij[0], ij[1]));
      for (auto& ij : idx) f << ',' << fmt_full(c.x(ij[0], ij[1]));
      f << '\n';
    }
  }
  {
    std::ofstream f(dir + "/lines.csv");
    f << "from,to,length_km,linecode\n";
    for (const auto& l : net.lines)
      f << l.from << ',' << l.to << ',' << fmt_full(l.length_km) << ','
        << l.linecode << '\n';
  }
  {
    std::ofstream f(dir + "/transformer.csv");
    f << "connection,kva,v_primary_ll,v_secondary_ll,r_pu,x_pu,tap_p,tap_s,"
         "shift_deg,shunt_pu\n";
    if (net.transformer) {
      const auto& t = *net.transformer;
      f << (t.connection == XfmrConnection::DeltaWyeG ? "delta-wye-g"
                                                      : "wye-g-wye-g")
        << ',' << fmt_full(t.kva) << ',' << fmt_full(t.v_primary_ll) << ','
        << fmt_full(t.v_secondary_ll) << ',' << fmt_full(t.r_pu) << ','
        << fmt_full(t.x_pu) << ',' << fmt_full(t.tap_p) << ','
        << fmt_full(t.tap_s) << ',' << fmt_full(t.shift_deg) << ','
        << fmt_full(t.shunt_pu) << '\n';
    }
  }
  {
    std::ofstream f(dir + "/source.csv");
    f << "v_pu,angle_deg\n";
    f << fmt_full(net.source_v_pu) << ',' << fmt_full(net.source_angle_deg)
      << '\n';
  }
}

std::vector<std::string> validate_network(const NetworkModel& net) {
  std::vector<std::string> v;
  int slacks = 0;
  for (const auto& b : net.buses) {
    if (b.kind == BusKind::Slack) ++slacks;
    if (b.phases.count() == 0)
      v.push_back("bus " + b.id + ": no phases present");
    if (b.kind == BusKind::Load) {
      int hot = 0;
      for (int p = 0; p < 3; ++p)
        if (b.psi[p] != 0) ++hot;
      if (hot != 1 || b.psi_phase() < 0)
        v.push_back("bus " + b.id + ": Psi not one-hot");
      else if (!b.phases.has(b.psi_phase()))
        v.push_back("bus " + b.id + ": Psi selects absent phase " +
                    phase_name(b.psi_phase()));
    } else {
      for (int p = 0; p < 3; ++p)
        if (b.psi[p] != 0)
          v.push_back("bus " + b.id + ": nonzero Psi on non-load bus");
    }
  }
  if (slacks != 1)
    v.push_back("expected exactly one slack bus, found " + std::to_string(slacks));

  for (const auto& l : net.lines) {
    if (l.from == l.to) v.push_back("line " + l.from + "-" + l.to + ": from == to");
    if (l.length_km <= 0)
      v.push_back("line " + l.from + "-" + l.to + ": nonpositive length");
    int fi = net.bus_index(l.from), ti = net.bus_index(l.to);
    if (fi < 0 || ti < 0) {
      v.push_back("line " + l.from + "-" + l.to + ": dangling endpoint");
      continue;
    }
    auto it = net.linecodes.find(l.linecode);
    if (it == net.linecodes.end()) {
      v.push_back("line " + l.from + "-" + l.to + ": unknown linecode '" +
                  l.linecode + "'");
      continue;
    }
    const LineCode& c = it->second;
    if ((c.r - c.r.transpose()).norm() != 0 || (c.x - c.x.transpose()).norm() != 0)
      v.push_back("linecode " + c.name + ": R or X not symmetric");
    for (int p = 0; p < 3; ++p) {
      if (c.phases.has(p) && c.r(p, p) <= 0)
        v.push_back("linecode " + c.name + ": nonpositive R diagonal on phase " +
                    phase_name(p));
      if (!c.phases.has(p)) {
        for (int q = 0; q < 3; ++q)
          if (c.r(p, q) != 0 || c.x(p, q) != 0)
            v.push_back("linecode " + c.name +
                        ": nonzero coupling on absent phase " + phase_name(p));
      }
    }
    if (!l.phases.subset_of(net.buses[fi].phases) ||
        !l.phases.subset_of(net.buses[ti].phases))
      v.push_back("line " + l.from + "-" + l.to +
                  ": phases not present at both endpoints");
  }

  if (net.transformer) {
    const auto& t = *net.transformer;
    if (t.tap_p < 0.9 || t.tap_p > 1.1 || t.tap_s < 0.9 || t.tap_s > 1.1)
      v.push_back("transformer: taps outside [0.9, 1.1]");
    if (t.x_pu <= 0) v.push_back("transformer: x must be positive");
    if (t.shunt_pu < 0) v.push_back("transformer: negative shunt");
    int si = net.slack_index();
    if (si >= 0 && net.buses[si].id != net.xfmr_primary)
      v.push_back("slack bus is not the transformer primary");
    int pi = net.bus_index(net.xfmr_primary), six = net.bus_index(net.xfmr_secondary);
    if (pi >= 0 && net.buses[pi].phases.count() != 3)
      v.push_back("transformer primary terminal is not three-phase");
    if (six >= 0 && net.buses[six].phases.count() != 3)
      v.push_back("transformer secondary terminal is not three-phase");
  }

  if (net.v_lb_frac >= net.v_ub_frac)
    v.push_back("voltage bounds: lower >= upper");

  // connectivity over lines + transformer edge
  if (!net.buses.empty()) {
    std::vector<char> seen(net.buses.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    auto push = [&](int i) {
      if (i >= 0 && !seen[i]) {
        seen[i] = 1;
        q.push(i);
      }
    };
    while (!q.empty()) {
      int i = q.front();
      q.pop();
      const std::string& id = net.buses[i].id;
      for (const auto& l : net.lines) {
        if (l.from == id) push(net.bus_index(l.to));
        if (l.to == id) push(net.bus_index(l.from));
      }
      if (net.transformer) {
        if (net.xfmr_primary == id) push(net.bus_index(net.xfmr_secondary));
        if (net.xfmr_secondary == id) push(net.bus_index(net.xfmr_primary));
      }
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i)
      if (!seen[i]) v.push_back("bus " + net.buses[i].id + ": disconnected");
  }

  return v;
}

NetworkModel reduce_series_nodes(const NetworkModel& net,
                                 const std::set<std::string>& protected_ids) {
  for (const auto& id : protected_ids)
    if (net.bus_index(id) < 0)
      throw ParseError("protected bus '" + id + "' absent from network");
  for (const auto& b : net.buses)
    if ((b.kind == BusKind::Slack || b.kind == BusKind::Load) &&
        !protected_ids.count(b.id))
      throw ParseError("protected set must include slack and load buses ('" +
                       b.id + "' missing)");

  NetworkModel out = net;
  bool changed = true;
  int synth = 0;
  while (changed) {
    changed = false;
    for (std::size_t bi = 0; bi < out.buses.size(); ++bi) {
      const BusRecord& b = out.buses[bi];
      if (b.kind != BusKind::Connector || protected_ids.count(b.id)) continue;
      // transformer terminals stay put
      if (out.transformer &&
          (b.id == out.xfmr_primary || b.id == out.xfmr_secondary))
        continue;
      std::vector<std::size_t> incident;
      for (std::size_t li = 0; li < out.lines.size(); ++li)
        if (out.lines[li].from == b.id || out.lines[li].to == b.id)
          incident.push_back(li);
      if (incident.size() != 2) continue;
      const LineRecord& l1 = out.lines[incident[0]];
      const LineRecord& l2 = out.lines[incident[1]];
      if (l1.phases != l2.phases) continue;  // series merge needs equal phase sets
      const LineCode& c1 = out.code_of(l1);
      const LineCode& c2 = out.code_of(l2);

      // total series impedance, folded into a synthetic 1 km code
      LineCode merged;
      merged.name = "series" + std::to_string(++synth);
      merged.r = c1.r * l1.length_km + c2.r * l2.length_km;
      merged.x = c1.x * l1.length_km + c2.x * l2.length_km;
      merged.phases = l1.phases;

      std::string end1 = l1.from == b.id ? l1.to : l1.from;
      std::string end2 = l2.from == b.id ? l2.to : l2.from;
      if (end1 == end2) continue;  // parallel pair, not a series chain

      LineRecord nl;
      nl.from = end1;
      nl.to = end2;
      nl.length_km = 1.0;
      nl.linecode = merged.name;
      nl.phases = merged.phases;

      std::vector<LineRecord> lines2;
      for (std::size_t li = 0; li < out.lines.size(); ++li)
        if (li != incident[0] && li != incident[1]) lines2.push_back(out.lines[li]);
      lines2.push_back(nl);
      out.lines = std::move(lines2);
      out.linecodes[merged.name] = merged;
      out.buses.erase(out.buses.begin() + static_cast<long>(bi));
      changed = true;
      break;
    }
  }

  // drop linecodes no longer referenced
  std::set<std::string> used;
  for (const auto& l : out.lines) used.insert(l.linecode);
  for (auto it = out.linecodes.begin(); it != out.linecodes.end();)
    it = used.count(it->first) ? std::next(it) : out.linecodes.erase(it);
  return out;
}

double ScenarioData::roof_of(const std::string& load) const {
  auto it = roof_area_m2.find(load);
  if (it != roof_area_m2.end()) return it->second;
  it = roof_area_m2.find("*");
  return it == roof_area_m2.end() ? 0.0 : it->second;
}

double ScenarioData::volume_of(const std::string& load) const {
  auto it = battery_volume_m3.find(load);
  if (it != battery_volume_m3.end()) return it->second;
  it = battery_volume_m3.find("*");
  return it == battery_volume_m3.end() ? 0.0 : it->second;
}

namespace {

// Reads one seasonal profile file: time_h plus one column per load id.
void read_profile(const std::string& path, const std::vector<std::string>& loads,
                  std::vector<double>* time_h,
                  std::vector<std::vector<double>>* series) {
  CsvTable t = CsvTable::read_file(path);
  for (const auto& h : t.header())
    if (h != "time_h" &&
        std::find(loads.begin(), loads.end(), h) == loads.end())
      throw ParseError(path + ": unknown load id '" + h + "'");
  series->assign(t.rows(), std::vector<double>(loads.size(), 0.0));
  std::vector<double> times;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    times.push_back(t.num(r, "time_h"));
    for (std::size_t i = 0; i < loads.size(); ++i) {
      double v = t.num(r, loads[i]);
      if (v < 0)
        throw ParseError(t.where(r) + ": negative demand for '" + loads[i] + "'");
      (*series)[r][i] = v;
    }
  }
  if (time_h->empty())
    *time_h = times;
  else if (*time_h != times)
    throw ParseError(path + ": time axis differs from other profiles (ragged)");
}

}  // namespace

ScenarioData parse_scenario(const ScenarioPaths& paths) {
  KeyValueConfig cfg = KeyValueConfig::read_file(paths.config);
  ScenarioData sc;

  {
    std::istringstream ss(cfg.str("seasons"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) sc.seasons.push_back(item);
    }
  }
  if (sc.seasons.empty()) throw ParseError(paths.config + ": no seasons listed");

  static const std::map<std::string, double> kDefaultDays = {
      {"spring", 92}, {"summer", 92}, {"autumn", 91}, {"winter", 90}};
  for (const auto& s : sc.seasons) {
    if (cfg.has("days." + s))
      sc.days_per_season.push_back(cfg.num("days." + s));
    else if (kDefaultDays.count(s))
      sc.days_per_season.push_back(kDefaultDays.at(s));
    else
      throw ParseError(paths.config + ": days." + s + " required for season '" +
                       s + "'");
  }

  sc.dt_hours = cfg.num_or("timestep_h", 1.0);
  if (sc.dt_hours <= 0) throw ParseError(paths.config + ": timestep_h must be > 0");

  sc.tariff.day_price = cfg.num_or("day_price", 0.18);
  sc.tariff.night_price = cfg.num_or("night_price", 0.08);
  std::string window = cfg.str_or("night_window", "0-7");
  {
    auto dash = window.find('-');
    if (dash == std::string::npos)
      throw ParseError(paths.config + ": night_window must look like '0-7'");
    sc.tariff.night_start_hour = std::stoi(window.substr(0, dash));
    sc.tariff.night_end_hour = std::stoi(window.substr(dash + 1));
  }
  sc.tariff.gas_price = cfg.num_or("gas_price", 0.02514);
  sc.tariff.export_tariff = cfg.num_or("export_tariff", 0.0503);
  sc.tariff.generation_tariff = cfg.num_or("generation_tariff", 0.1);

  auto& tech = sc.tech;
  tech.pv_cost_per_panel = cfg.num_or("pv_cost_per_panel", 450);
  tech.pv_efficiency = cfg.num_or("pv_efficiency", 0.18);
  tech.pv_fixed_op_cost = cfg.num_or("pv_fixed_op_cost", 12.5);
  tech.panel_area_m2 = cfg.num_or("panel_area_m2", 1.75);
  tech.panel_capacity_kw = cfg.num_or("panel_capacity_kw", 0.25);
  tech.boiler_cost_per_kw = cfg.num_or("boiler_cost_per_kw", 120);
  tech.boiler_efficiency = cfg.num_or("boiler_efficiency", 0.94);

  BatteryTech bat;
  bat.name = cfg.str_or("battery_name", "li-ion");
  bat.energy_density_kwh_m3 = cfg.num_or("battery_energy_density_kwh_m3", 20);
  bat.dod_max = cfg.num_or("battery_dod_max", 0.85);
  bat.soc_max = cfg.num_or("battery_soc_max", 0.9);
  bat.cost_per_kwh = cfg.num_or("battery_cost_per_kwh", 270);
  bat.op_cost_per_kwh_yr = cfg.num_or("battery_op_cost_per_kwh_yr", 11);
  bat.eta_ch = cfg.num_or("battery_eta_charge", 0.94);
  bat.eta_disch = cfg.num_or("battery_eta_discharge", 0.91);
  tech.batteries = {bat};

  sc.roof_area_m2["*"] = cfg.num_or("roof_area_m2", 35);
  sc.battery_volume_m3["*"] = cfg.num_or("battery_volume_m3", 0.5);
  for (const auto& [k, v] : cfg.entries()) {
    if (k.rfind("roof_area_m2.", 0) == 0)
      sc.roof_area_m2[k.substr(13)] = std::stod(v);
    if (k.rfind("battery_volume_m3.", 0) == 0)
      sc.battery_volume_m3[k.substr(18)] = std::stod(v);
  }

  sc.interest_rate = cfg.num_or("interest_rate", 0.075);
  sc.lifetime_years = cfg.num_or("lifetime_years", 20);
  sc.power_factor = cfg.num_or("power_factor", 0.95);
  if (cfg.has("v_upper_frac")) sc.v_ub_frac = cfg.num("v_upper_frac");
  if (cfg.has("v_lower_frac")) sc.v_lb_frac = cfg.num("v_lower_frac");
  if (cfg.has("s_base_kva_per_phase")) sc.s_base_kva = cfg.num("s_base_kva_per_phase");

  // Load ids come from the first elec profile's header.
  {
    CsvTable probe =
        CsvTable::read_file(paths.profiles_dir + "/" + sc.seasons[0] + "_elec.csv");
    for (const auto& h : probe.header())
      if (h != "time_h") sc.loads.push_back(h);
  }
  if (sc.loads.empty())
    throw ParseError(paths.profiles_dir + ": no load columns in elec profile");

  sc.elec.resize(sc.seasons.size());
  sc.heat.resize(sc.seasons.size());
  for (std::size_t s = 0; s < sc.seasons.size(); ++s) {
    read_profile(paths.profiles_dir + "/" + sc.seasons[s] + "_elec.csv", sc.loads,
                 &sc.time_h, &sc.elec[s]);
    read_profile(paths.profiles_dir + "/" + sc.seasons[s] + "_heat.csv", sc.loads,
                 &sc.time_h, &sc.heat[s]);
  }

  {
    CsvTable irr = CsvTable::read_file(paths.profiles_dir + "/irradiance.csv");
    sc.irradiance.assign(sc.seasons.size(),
                         std::vector<double>(sc.time_h.size(), 0.0));
    if (irr.rows() != sc.time_h.size())
      throw ParseError(paths.profiles_dir +
                       "/irradiance.csv: row count differs from profiles (ragged)");
    for (std::size_t s = 0; s < sc.seasons.size(); ++s)
      for (std::size_t r = 0; r < irr.rows(); ++r)
        sc.irradiance[s][r] = irr.num(r, sc.seasons[s]);
  }

  auto problems = validate_scenario(sc);
  if (!problems.empty()) throw ParseError(paths.config + ": " + problems.front());
  return sc;
}

std::vector<std::string> validate_scenario(const ScenarioData& sc) {
  std::vector<std::string> v;
  if (sc.dt_hours <= 0) v.push_back("timestep must be positive");
  if (sc.power_factor <= 0 || sc.power_factor > 1)
    v.push_back("power factor outside (0, 1]");
  for (const auto& b : sc.tech.batteries) {
    if (b.eta_ch <= 0 || b.eta_ch > 1) v.push_back("charge efficiency outside (0,1]");
    if (b.eta_disch <= 0 || b.eta_disch > 1)
      v.push_back("discharge efficiency outside (0,1]");
    if (b.dod_max <= 0 || b.dod_max > 1) v.push_back("DoD max outside (0,1]");
    if (b.soc_max <= 0 || b.soc_max > 1) v.push_back("SoC max outside (0,1]");
  }
  for (std::size_t s = 0; s < sc.elec.size(); ++s) {
    if (sc.elec[s].size() != sc.time_h.size() ||
        sc.heat[s].size() != sc.time_h.size())
      v.push_back("season " + sc.seasons[s] + ": profile length mismatch");
    for (const auto& row : sc.elec[s])
      for (double d : row)
        if (d < 0) v.push_back("negative electricity demand");
    for (const auto& row : sc.heat[s])
      for (double d : row)
        if (d < 0) v.push_back("negative heat demand");
  }
  return v;
}

}  // namespace desflow
