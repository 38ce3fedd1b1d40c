#include "formctl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace formctl {

namespace {

struct Line {
  int number = 0;
  std::string key;
  std::string value;
};

struct Section {
  std::string name;
  int number = 0;
  std::vector<Line> lines;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
  throw ScenarioError(name + ":" + std::to_string(line) + ": " + msg);
}

std::vector<double> parse_numbers(const std::string& scn, const Line& ln) {
  std::vector<double> out;
  std::istringstream is(ln.value);
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) fail(scn, ln.number, "malformed number in '" + ln.key + "'");
  if (out.empty()) fail(scn, ln.number, "'" + ln.key + "' needs at least one number");
  return out;
}

// Accumulates one section's key/value lines with strict known-key checking.
class SectionReader {
 public:
  SectionReader(const std::string& scn, const Section& sec, std::set<std::string> multi_keys)
      : scn_(scn), sec_(sec), multi_(std::move(multi_keys)) {
    for (const auto& ln : sec.lines) {
      if (multi_.count(ln.key)) {
        repeated_[ln.key].push_back(ln);
      } else {
        if (single_.count(ln.key))
          fail(scn_, ln.number, "duplicate key '" + ln.key + "'");
        single_[ln.key] = ln;
      }
    }
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return single_.count(key) > 0;
  }
  const Line& get(const std::string& key) {
    used_.insert(key);
    auto it = single_.find(key);
    if (it == single_.end())
      fail(scn_, sec_.number, "[" + sec_.name + "] is missing required key '" + key + "'");
    return it->second;
  }
  std::string str(const std::string& key) { return get(key).value; }
  double num(const std::string& key) {
    const Line& ln = get(key);
    auto v = parse_numbers(scn_, ln);
    if (v.size() != 1) fail(scn_, ln.number, "'" + key + "' must be a single number");
    return v[0];
  }
  double num_or(const std::string& key, double dflt) { return has(key) ? num(key) : dflt; }
  std::vector<double> nums(const std::string& key) { return parse_numbers(scn_, get(key)); }
  const std::vector<Line>& all(const std::string& key) {
    used_.insert(key);
    static const std::vector<Line> empty;
    auto it = repeated_.find(key);
    return it == repeated_.end() ? empty : it->second;
  }
  void finish() {
    for (const auto& [k, ln] : single_)
      if (!used_.count(k)) fail(scn_, ln.number, "unknown key '" + k + "' in [" + sec_.name + "]");
    for (const auto& [k, lns] : repeated_)
      if (!used_.count(k))
        fail(scn_, lns.front().number, "unknown key '" + k + "' in [" + sec_.name + "]");
  }

 private:
  const std::string& scn_;
  const Section& sec_;
  std::set<std::string> multi_;
  std::map<std::string, Line> single_;
  std::map<std::string, std::vector<Line>> repeated_;
  std::set<std::string> used_;
};

Eigen::MatrixXd yaw_rotation(int m, double angle) {
  if (m == 2) return rotation2d(angle);
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  R.topLeftCorner<2, 2>() = rotation2d(angle);
  return R;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  // Pass 1: split into sections.
  std::vector<Section> sections;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(name, lineno, "unterminated section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(name, lineno, "expected 'key = value'");
    if (sections.empty()) fail(name, lineno, "key outside of any section");
    sections.back().lines.push_back({lineno, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }

  const Section* formation = nullptr;
  const Section* model = nullptr;
  const Section* controller = nullptr;
  const Section* simulation = nullptr;
  const Section* gridsec = nullptr;
  std::map<int, const Section*> agent_secs;
  for (const auto& sec : sections) {
    auto unique = [&](const Section*& slot) {
      if (slot) fail(name, sec.number, "duplicate section [" + sec.name + "]");
      slot = &sec;
    };
    if (sec.name == "formation") unique(formation);
    else if (sec.name == "model") unique(model);
    else if (sec.name == "controller") unique(controller);
    else if (sec.name == "simulation") unique(simulation);
    else if (sec.name == "grid") unique(gridsec);
    else if (sec.name.rfind("agent ", 0) == 0) {
      int idx = 0;
      try {
        idx = std::stoi(sec.name.substr(6));
      } catch (...) {
        fail(name, sec.number, "bad agent index in [" + sec.name + "]");
      }
      if (agent_secs.count(idx)) fail(name, sec.number, "duplicate section [" + sec.name + "]");
      agent_secs[idx] = &sec;
    } else {
      fail(name, sec.number, "unknown section [" + sec.name + "]");
    }
  }
  if (!formation) fail(name, 1, "missing [formation] section");
  if (!model) fail(name, 1, "missing [model] section");
  if (!controller) fail(name, 1, "missing [controller] section");

  Scenario sc;
  sc.name = name;

  // [formation]
  SectionReader fr(name, *formation, {"edge"});
  std::string flavor_s = fr.str("flavor");
  Flavor flavor;
  if (flavor_s == "distance") flavor = Flavor::Distance;
  else if (flavor_s == "displacement") flavor = Flavor::Displacement;
  else fail(name, fr.get("flavor").number, "flavor must be 'distance' or 'displacement'");
  int N = static_cast<int>(fr.num("agents"));
  int m = static_cast<int>(fr.num("dimension"));
  FormationGraph graph(N, m, flavor);
  for (const Line& ln : fr.all("edge")) {
    auto v = parse_numbers(name, ln);
    size_t want = (flavor == Flavor::Distance) ? 3 : 2 + m;
    if (v.size() != want)
      fail(name, ln.number, "edge needs tail, head and " +
                                std::string(flavor == Flavor::Distance ? "a distance"
                                                                       : "a relative vector"));
    int tail = static_cast<int>(v[0]) - 1, head = static_cast<int>(v[1]) - 1;
    if (flavor == Flavor::Distance) {
      graph.add_edge(tail, head, v[2]);
    } else {
      Eigen::VectorXd z(m);
      for (int j = 0; j < m; ++j) z(j) = v[2 + j];
      graph.add_edge(tail, head, z);
    }
  }
  if (fr.has("reference")) {
    auto v = fr.nums("reference");
    if (static_cast<int>(v.size()) != N * m)
      fail(name, fr.get("reference").number,
           "reference needs " + std::to_string(N * m) + " numbers");
    Eigen::MatrixXd ref(N, m);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < m; ++j) ref(i, j) = v[i * m + j];
    graph.set_reference(ref);
  }
  fr.finish();
  try {
    graph.validate();
  } catch (const std::exception& ex) {
    fail(name, formation->number, ex.what());
  }

  // [model]
  SectionReader mr(name, *model, {});
  sc.model_kind = mr.str("kind");
  std::string grav = mr.has("gravity") ? mr.str("gravity") : "horizontal";
  GravityMode gmode;
  if (grav == "horizontal") gmode = GravityMode::Horizontal;
  else if (grav == "vertical") gmode = GravityMode::Vertical;
  else fail(name, mr.get("gravity").number, "gravity must be 'horizontal' or 'vertical'");

  int dof = 0, params = 2;
  PlanarArmParams pp;
  SpatialArmParams sp;
  if (sc.model_kind == "planar2") {
    if (m != 2) fail(name, model->number, "planar2 model needs dimension = 2");
    dof = 2;
    pp.m1 = mr.num_or("m1", pp.m1);
    pp.m2 = mr.num_or("m2", pp.m2);
    pp.Ic1 = mr.num_or("Ic1", pp.Ic1);
    pp.Ic2 = mr.num_or("Ic2", pp.Ic2);
    pp.l1 = mr.num_or("l1", pp.l1);
    pp.l2 = mr.num_or("l2", pp.l2);
    pp.lc1 = mr.num_or("lc1", pp.lc1);
    pp.lc2 = mr.num_or("lc2", pp.lc2);
    pp.g = mr.num_or("g", pp.g);
    pp.gravity_mode = gmode;
  } else if (sc.model_kind == "spatial3") {
    if (m != 3) fail(name, model->number, "spatial3 model needs dimension = 3");
    dof = 3;
    sp.m1 = mr.num_or("m1", sp.m1);
    sp.m2 = mr.num_or("m2", sp.m2);
    sp.Ir1 = mr.num_or("Ir1", sp.Ir1);
    sp.Ir2 = mr.num_or("Ir2", sp.Ir2);
    sp.Ir3 = mr.num_or("Ir3", sp.Ir3);
    sp.l1 = mr.num_or("l1", sp.l1);
    sp.l2 = mr.num_or("l2", sp.l2);
    sp.lc1 = mr.num_or("lc1", sp.lc1);
    sp.lc2 = mr.num_or("lc2", sp.lc2);
    sp.g = mr.num_or("g", sp.g);
    sp.gravity_mode = gmode;
  } else {
    fail(name, mr.get("kind").number, "kind must be 'planar2' or 'spatial3'");
  }
  mr.finish();

  // [controller]
  SectionReader cr(name, *controller, {});
  std::string var_s = cr.str("variant");
  Variant variant;
  if (var_s == "exact") variant = Variant::Exact;
  else if (var_s == "naive") variant = Variant::Naive;
  else if (var_s == "approx") variant = Variant::Approx;
  else if (var_s == "adaptive") variant = Variant::Adaptive;
  else fail(name, cr.get("variant").number, "variant must be exact|naive|approx|adaptive");
  Gains gains;
  gains.kp = cr.num("kp");
  gains.kd = cr.num("kd");
  gains.ki = cr.num_or("ki", 0.0);
  gains.alpha = cr.num_or("alpha", 0.0);
  if (gains.kp <= 0) fail(name, cr.get("kp").number, "kp must be positive");
  if (gains.kd <= 0) fail(name, cr.get("kd").number, "kd must be positive");
  if (gains.ki < 0) fail(name, cr.get("ki").number, "ki must be nonnegative");
  std::vector<double> ahat0;
  if (cr.has("ahat0")) {
    if (variant == Variant::Exact)
      fail(name, cr.get("ahat0").number, "ahat0 is meaningless for the exact variant");
    ahat0 = cr.nums("ahat0");
    if (static_cast<int>(ahat0.size()) != params)
      fail(name, cr.get("ahat0").number, "ahat0 needs " + std::to_string(params) + " numbers");
  }
  if (cr.has("mass_scale")) {
    if (variant != Variant::Naive)
      fail(name, cr.get("mass_scale").number, "mass_scale applies to the naive variant only");
    sc.mass_scale = cr.num("mass_scale");
  }
  cr.finish();

  // [agent i]
  std::vector<std::shared_ptr<Manipulator>> arms;
  std::vector<Eigen::VectorXd> q0s, xi0s, ahat0s;
  bool any_xi0 = false;
  for (int i = 1; i <= N; ++i) {
    auto it = agent_secs.find(i);
    if (it == agent_secs.end()) fail(name, 1, "missing section [agent " + std::to_string(i) + "]");
    SectionReader ar(name, *it->second, {});
    auto base = ar.nums("base");
    if (static_cast<int>(base.size()) != m)
      fail(name, ar.get("base").number, "base needs " + std::to_string(m) + " numbers");
    double angle = ar.num_or("base_angle", 0.0);
    auto q0v = ar.nums("q0");
    if (static_cast<int>(q0v.size()) != dof)
      fail(name, ar.get("q0").number, "q0 needs " + std::to_string(dof) + " numbers");
    std::shared_ptr<Manipulator> arm;
    if (sc.model_kind == "planar2") arm = std::make_shared<PlanarTwoLink>(pp);
    else arm = std::make_shared<SpatialThreeLink>(sp);
    arm->set_base(Eigen::Map<Eigen::VectorXd>(base.data(), m), yaw_rotation(m, angle));
    arms.push_back(arm);
    q0s.push_back(Eigen::Map<Eigen::VectorXd>(q0v.data(), dof));
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(dof);
    if (ar.has("xi0")) {
      auto xv = ar.nums("xi0");
      if (static_cast<int>(xv.size()) != dof)
        fail(name, ar.get("xi0").number, "xi0 needs " + std::to_string(dof) + " numbers");
      xi0 = Eigen::Map<Eigen::VectorXd>(xv.data(), dof);
      any_xi0 = true;
    }
    xi0s.push_back(xi0);
    if (!ahat0.empty())
      ahat0s.push_back(Eigen::Map<Eigen::VectorXd>(ahat0.data(), params));
    ar.finish();
  }
  for (const auto& [idx, sec] : agent_secs)
    if (idx < 1 || idx > N) fail(name, sec->number, "agent index outside [1..N]");

  // [simulation]
  if (simulation) {
    SectionReader sr(name, *simulation, {});
    sc.sim.dt = sr.num_or("dt", sc.sim.dt);
    sc.sim.duration = sr.num_or("duration", sc.sim.duration);
    sc.sim.record_stride = static_cast<int>(sr.num_or("record_stride", sc.sim.record_stride));
    sc.sim.sigma_floor = sr.num_or("sigma_floor", sc.sim.sigma_floor);
    sr.finish();
    if (sc.sim.dt <= 0) fail(name, simulation->number, "dt must be positive");
    if (sc.sim.duration <= 0) fail(name, simulation->number, "duration must be positive");
    if (sc.sim.record_stride < 1) fail(name, simulation->number, "record_stride must be >= 1");
  }

  // [grid]
  if (gridsec) {
    SectionReader gr(name, *gridsec, {});
    GridSpec& g = sc.grid;
    g.z_step = gr.num_or("z_step", g.z_step);
    g.z_span = gr.num_or("z_span", g.z_span);
    g.e_radius = gr.num_or("e_radius", g.e_radius);
    g.xi_radius_sq = gr.num_or("xi_radius_sq", g.xi_radius_sq);
    g.q_step = gr.num_or("q_step", g.q_step);
    if (gr.has("q1_lo")) {
      auto v = gr.nums("q1_lo");
      if (static_cast<int>(v.size()) != N)
        fail(name, gr.get("q1_lo").number, "q1_lo needs one entry per agent");
      g.q1_lo = v;
    }
    g.q1_span = gr.num_or("q1_span", g.q1_span);
    g.q2_lo = gr.num_or("q2_lo", g.q2_lo);
    g.q2_hi = gr.num_or("q2_hi", g.q2_hi);
    g.a_lo = gr.num_or("a_lo", g.a_lo);
    g.a_hi = gr.num_or("a_hi", g.a_hi);
    g.a_step = gr.num_or("a_step", g.a_step);
    g.samples = static_cast<int>(gr.num_or("samples", g.samples));
    g.seed = static_cast<unsigned>(gr.num_or("seed", g.seed));
    gr.finish();
  }

  Controller ctl(variant, gains);
  if (variant == Variant::Naive) ctl.set_nominal_mass_scale(sc.mass_scale);
  sc.network = Network{std::move(graph), std::move(arms), std::move(q0s),
                       any_xi0 ? std::move(xi0s) : std::vector<Eigen::VectorXd>{},
                       std::move(ahat0s), ctl};
  sc.ahat0 = ahat0.empty() ? Eigen::VectorXd()
                           : Eigen::Map<Eigen::VectorXd>(ahat0.data(), params);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace formctl
