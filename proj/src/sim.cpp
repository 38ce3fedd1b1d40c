#include "formctl/sim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace formctl {

namespace {

// Flat state layout per agent: [q, xi, (eta), (ahat)].
struct Layout {
  int n_agents = 0;
  int dof = 0;
  int params = 0;
  bool eta = false;
  bool ahat = false;
  int per_agent = 0;

  int q_off(int i) const { return i * per_agent; }
  int xi_off(int i) const { return i * per_agent + dof; }
  int eta_off(int i) const { return i * per_agent + 2 * dof; }
  int ahat_off(int i) const { return i * per_agent + 2 * dof + (eta ? dof : 0); }
  int size() const { return n_agents * per_agent; }
};

}  // namespace

RunResult simulate(const Network& net, const SimConfig& cfg, const ControlOverride& override) {
  net.graph.validate();
  const int n_agents = net.graph.num_agents();
  if (static_cast<int>(net.arms.size()) != n_agents ||
      static_cast<int>(net.q0.size()) != n_agents)
    throw std::invalid_argument("network needs one arm and one initial q per agent");
  const int m = net.graph.ambient_dim();
  for (const auto& arm : net.arms)
    if (arm->task_dim() != m)
      throw std::invalid_argument("arm task dimension does not match the graph");
  if (cfg.dt <= 0 || cfg.duration <= 0 || cfg.record_stride < 1)
    throw std::invalid_argument("invalid simulation config");

  Layout L;
  L.n_agents = n_agents;
  L.dof = net.arms[0]->dof();
  L.params = net.arms[0]->param_count();
  L.eta = net.controller.has_compensator() && !override;
  L.ahat = net.controller.has_adaptation() && !override;
  L.per_agent = 2 * L.dof + (L.eta ? L.dof : 0) + (L.ahat ? L.params : 0);

  const bool needs_ahat = net.controller.variant() != Variant::Exact;
  std::vector<Eigen::VectorXd> ahat_fixed(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    if (!net.ahat0.empty()) {
      if (net.ahat0[i].size() != L.params)
        throw std::invalid_argument("initial parameter guess dimension mismatch");
      ahat_fixed[i] = net.ahat0[i];
    } else if (needs_ahat) {
      ahat_fixed[i] = net.arms[i]->kinematic_params();
    }
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(L.size());
  for (int i = 0; i < n_agents; ++i) {
    if (net.q0[i].size() != L.dof) throw std::invalid_argument("initial q dimension mismatch");
    s.segment(L.q_off(i), L.dof) = net.q0[i];
    if (!net.xi0.empty()) {
      if (net.xi0[i].size() != L.dof)
        throw std::invalid_argument("initial velocity dimension mismatch");
      s.segment(L.xi_off(i), L.dof) = net.xi0[i];
    }
    if (L.ahat) s.segment(L.ahat_off(i), L.params) = ahat_fixed[i];
  }

  auto positions = [&](const Eigen::VectorXd& st) {
    Eigen::VectorXd x(m * n_agents);
    for (int i = 0; i < n_agents; ++i)
      x.segment(m * i, m) = net.arms[i]->tool_world(st.segment(L.q_off(i), L.dof));
    return x;
  };

  const Eigen::VectorXd empty;
  auto deriv = [&](double t, const Eigen::VectorXd& st, Eigen::VectorXd* u_out) {
    Eigen::VectorXd ds(L.size());
    Eigen::VectorXd ehat = net.graph.gradient(positions(st));
    for (int i = 0; i < n_agents; ++i) {
      const auto q = st.segment(L.q_off(i), L.dof);
      const auto xi = st.segment(L.xi_off(i), L.dof);
      Eigen::VectorXd ehat_i = ehat.segment(m * i, m);
      Eigen::VectorXd eta =
          L.eta ? Eigen::VectorXd(st.segment(L.eta_off(i), L.dof)) : empty;
      Eigen::VectorXd ahat = L.ahat ? Eigen::VectorXd(st.segment(L.ahat_off(i), L.params))
                                    : ahat_fixed[i];
      Eigen::VectorXd u;
      ControlResult cr;
      if (override) {
        u = override(i, t, q, xi, ehat_i);
      } else {
        cr = net.controller.compute(*net.arms[i], q, xi, ehat_i, eta, ahat);
        u = cr.u;
      }
      const Manipulator& arm = *net.arms[i];
      Eigen::VectorXd rhs = u - arm.coriolis(q, xi) * xi - arm.gravity(q);
      ds.segment(L.q_off(i), L.dof) = xi;
      ds.segment(L.xi_off(i), L.dof) = arm.inertia(q).ldlt().solve(rhs);
      if (L.eta)
        ds.segment(L.eta_off(i), L.dof) =
            cr.eta_dot.size() ? cr.eta_dot : Eigen::VectorXd::Zero(L.dof);
      if (L.ahat)
        ds.segment(L.ahat_off(i), L.params) =
            cr.ahat_dot.size() ? cr.ahat_dot : Eigen::VectorXd::Zero(L.params);
      if (u_out) u_out->segment(L.dof * i, L.dof) = u;
    }
    return ds;
  };

  RunResult res;
  Trace& tr = res.trace;
  tr.num_agents = n_agents;
  tr.dof = L.dof;
  tr.task_dim = m;
  tr.num_edges = net.graph.num_edges();
  tr.has_eta = L.eta;
  tr.has_ahat = L.ahat;
  res.min_sigma = std::numeric_limits<double>::infinity();

  auto record = [&](double t, const Eigen::VectorXd& st) {
    Eigen::VectorXd x = positions(st);
    Eigen::VectorXd u(L.dof * n_agents);
    deriv(t, st, &u);  // recompute the instantaneous torque for logging
    tr.t.push_back(t);
    Eigen::VectorXd q(L.dof * n_agents), xi(L.dof * n_agents);
    for (int i = 0; i < n_agents; ++i) {
      q.segment(L.dof * i, L.dof) = st.segment(L.q_off(i), L.dof);
      xi.segment(L.dof * i, L.dof) = st.segment(L.xi_off(i), L.dof);
    }
    tr.q.push_back(q);
    tr.xi.push_back(xi);
    tr.x.push_back(x);
    tr.e.push_back(net.graph.edge_errors(x));
    tr.ehat.push_back(net.graph.gradient(x));
    tr.u.push_back(u);
    if (L.eta) {
      Eigen::VectorXd eta(L.dof * n_agents);
      for (int i = 0; i < n_agents; ++i)
        eta.segment(L.dof * i, L.dof) = st.segment(L.eta_off(i), L.dof);
      tr.eta.push_back(eta);
    }
    if (L.ahat) {
      Eigen::VectorXd ah(L.params * n_agents);
      for (int i = 0; i < n_agents; ++i)
        ah.segment(L.params * i, L.params) = st.segment(L.ahat_off(i), L.params);
      tr.ahat.push_back(ah);
    }
    double sig = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_agents; ++i)
      sig = std::min(sig, net.arms[i]->min_singular_value(st.segment(L.q_off(i), L.dof)));
    tr.min_sigma.push_back(sig);
    res.min_sigma = std::min(res.min_sigma, sig);
    if (sig < cfg.sigma_floor) ++res.singularity_warnings;
  };

  const int steps = static_cast<int>(std::llround(cfg.duration / cfg.dt));
  record(0.0, s);
  Eigen::VectorXd centroid0 = Eigen::VectorXd::Zero(m);
  {
    Eigen::VectorXd x0 = positions(s);
    for (int i = 0; i < n_agents; ++i) centroid0 += x0.segment(m * i, m);
    centroid0 /= n_agents;
  }

  for (int it = 1; it <= steps; ++it) {
    double t = (it - 1) * cfg.dt;
    Eigen::VectorXd k1 = deriv(t, s, nullptr);
    Eigen::VectorXd k2 = deriv(t + cfg.dt / 2, s + cfg.dt / 2 * k1, nullptr);
    Eigen::VectorXd k3 = deriv(t + cfg.dt / 2, s + cfg.dt / 2 * k2, nullptr);
    Eigen::VectorXd k4 = deriv(t + cfg.dt, s + cfg.dt * k3, nullptr);
    s += cfg.dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!s.allFinite()) {
      res.blew_up = true;
      res.blowup_time = it * cfg.dt;
      break;
    }
    if (it % cfg.record_stride == 0 || it == steps) record(it * cfg.dt, s);
  }

  if (!res.blew_up) {
    Eigen::VectorXd x1 = positions(s);
    Eigen::VectorXd centroid1 = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n_agents; ++i) centroid1 += x1.segment(m * i, m);
    centroid1 /= n_agents;
    res.centroid_drift = centroid1 - centroid0;
    res.final_e = tr.e.back();
    Eigen::VectorXd xi_final(L.dof * n_agents);
    for (int i = 0; i < n_agents; ++i)
      xi_final.segment(L.dof * i, L.dof) = s.segment(L.xi_off(i), L.dof);
    res.final_xi_norm = xi_final.norm();
  }
  return res;
}

TailStats tail_stats(const Trace& trace, double window) {
  TailStats st;
  if (trace.t.empty()) return st;
  double t_from = trace.t.back() - window;
  for (size_t i = 0; i < trace.t.size(); ++i) {
    if (trace.t[i] < t_from) continue;
    st.max_abs_e = std::max(st.max_abs_e, trace.e[i].lpNorm<Eigen::Infinity>());
    st.max_xi = std::max(st.max_xi, trace.xi[i].norm());
  }
  return st;
}

int monotonicity_violations(const std::vector<double>& series, double tol) {
  int n = 0;
  for (size_t i = 1; i < series.size(); ++i)
    if (series[i] - series[i - 1] > tol) ++n;
  return n;
}

}  // namespace formctl
