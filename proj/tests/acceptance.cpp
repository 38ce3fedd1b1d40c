// Acceptance gate: one pass/fail line per criterion, tolerances pinned below.
// Exit code = number of failed criteria.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "formctl/certificates.hpp"
#include "formctl/scenario.hpp"
#include "formctl/sim.hpp"

using namespace formctl;

namespace {

const double kPi = 3.141592653589793238462643383279502884;

bool line(int idx, const std::string& what, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %-58s %s\n", ok ? "[PASS]" : "[FAIL]", idx, what.c_str(),
              detail.c_str());
  return ok;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<Eigen::VectorXd> split(const Eigen::VectorXd& v, int n, int d) {
  std::vector<Eigen::VectorXd> out(n);
  for (int i = 0; i < n; ++i) out[i] = v.segment(d * i, d);
  return out;
}

Eigen::VectorXd randn(std::mt19937& rng, int k) {
  std::normal_distribution<double> g(0, 1);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <scenario-dir>\n";
    return 64;
  }
  const std::filesystem::path scn_dir = argv[1];
  int failures = 0;
  auto tally = [&](bool ok) {
    if (!ok) ++failures;
  };

  // ---- criterion 1: square scenario, adaptive law -------------------------
  // thresholds: max|e(30)| <= 1e-2 m^2, ||xi(30)|| <= 1e-2 rad/s,
  //             sigma_min(J) > 1e-3 throughout
  Scenario square = load_scenario((scn_dir / "square2d.scn").string());
  {
    RunResult res = simulate(square.network, square.sim);
    double emax = res.blew_up ? INFINITY : res.final_e.cwiseAbs().maxCoeff();
    bool ok = !res.blew_up && emax <= 1e-2 && res.final_xi_norm <= 1e-2 &&
              res.min_sigma > 1e-3;
    tally(line(1, "square scenario converges under the adaptive law", ok,
               "max|e(30)|=" + fmt(emax) + " (tol 1e-2), |xi(30)|=" + fmt(res.final_xi_norm) +
                   " (tol 1e-2), min_sigma=" + fmt(res.min_sigma) + " (floor 1e-3)"));
  }

  // ---- criterion 2: square scenario, true-parameter law -------------------
  // same thresholds plus the energy candidate (pinned 1/4 coefficient)
  // non-increasing with per-step increases <= 1e-6
  {
    Scenario sc = load_scenario((scn_dir / "square2d.scn").string());
    sc.network.controller = Controller(Variant::Exact, sc.network.controller.gains());
    sc.network.ahat0.clear();
    RunResult res = simulate(sc.network, sc.sim);
    double emax = res.blew_up ? INFINITY : res.final_e.cwiseAbs().maxCoeff();
    int viol = 0;
    if (!res.blew_up) {
      std::vector<double> u1;
      std::vector<Eigen::VectorXd> none, qs;
      for (size_t k = 0; k < res.trace.t.size(); ++k)
        u1.push_back(lyapunov_values(sc.network.graph, sc.network.arms,
                                     split(res.trace.q[k], 4, 2), split(res.trace.xi[k], 4, 2),
                                     none, none, sc.network.controller.gains(), 1.0, qs,
                                     /*e_coeff=*/0.25)
                         .u1);
      viol = monotonicity_violations(u1, 1e-6);
    }
    bool ok = !res.blew_up && emax <= 1e-2 && res.final_xi_norm <= 1e-2 && viol == 0;
    tally(line(2, "square scenario converges with monotone energy candidate", ok,
               "max|e(30)|=" + fmt(emax) + " (tol 1e-2), U1 increases=" + std::to_string(viol) +
                   " (tol 0 at 1e-6)"));
  }

  // ---- criterion 3: integral compensator vs naive gravity model -----------
  // vertical gravity, exact Jacobian (ahat = a), 10% gravity model error in
  // the naive law: compensated error <= 1e-2 and naive error >= 10x larger
  {
    Scenario sc = load_scenario((scn_dir / "vertical4.scn").string());
    RunResult comp = simulate(sc.network, sc.sim);
    double e_comp = comp.blew_up ? INFINITY : comp.final_e.cwiseAbs().maxCoeff();

    Scenario nv = load_scenario((scn_dir / "vertical4.scn").string());
    nv.network.controller = Controller(Variant::Naive, nv.network.controller.gains());
    nv.network.controller.set_nominal_mass_scale(0.9);
    RunResult naive = simulate(nv.network, nv.sim);
    double e_naive = naive.blew_up ? INFINITY : naive.final_e.cwiseAbs().maxCoeff();

    bool ok = e_comp <= 1e-2 && e_naive >= 10 * e_comp && std::isfinite(e_naive);
    tally(line(3, "integral compensator removes the gravity-model offset", ok,
               "compensated max|e(60)|=" + fmt(e_comp) + " (tol 1e-2), naive=" + fmt(e_naive) +
                   " (>= 10x)"));
  }

  // ---- criterion 4: certificate constants on the pinned grid -----------
  // bands: c_min = 0.16 +-10%, c_max = 7.8 +-10%, lambda4 = 0.5 +-25%,
  //        k11 = 450 +-25%, k12 = 9000 +-25%
  {
    CertificateReport rep =
        estimate_certificate(square.network.graph, square.network.arms, square.grid,
                             Variant::Adaptive, square.network.controller.gains());
    auto in_band = [](double v, double mid, double rel) {
      return v >= mid * (1 - rel) && v <= mid * (1 + rel);
    };
    bool ok_cmin = in_band(rep.c_min, 0.16, 0.10);
    bool ok_cmax = in_band(rep.c_max, 7.8, 0.10);
    bool ok_l4 = in_band(rep.lambda4, 0.5, 0.25);
    bool ok_k11 = in_band(rep.k11, 450.0, 0.25);
    bool ok_k12 = in_band(rep.k12, 9000.0, 0.25);
    bool ok = ok_cmin && ok_cmax && ok_l4 && ok_k11 && ok_k12;
    tally(line(4, "certificate constants inside the pinned reference bands", ok,
               "c_min=" + fmt(rep.c_min) + (ok_cmin ? "" : "!") + ", c_max=" + fmt(rep.c_max) +
                   (ok_cmax ? "" : "!") + ", lambda4=" + fmt(rep.lambda4) + (ok_l4 ? "" : "!") +
                   ", k11=" + fmt(rep.k11) + (ok_k11 ? "" : "!") + ", k12=" + fmt(rep.k12) +
                   (ok_k12 ? "" : "!")));
    // raw stability-condition margins, reported as computed (informational)
    for (const auto& c : rep.conditions)
      std::printf("       margin: %-46s lhs=%.4g rhs=%.4g %s\n", c.name.c_str(), c.lhs, c.rhs,
                  c.ok ? "ok" : "violated");
  }

  // ---- criterion 5: property suites ---------------------------------------
  {
    std::mt19937 rng(424242);
    bool all = true;
    std::string detail;
    auto sub = [&](const char* name, double worst, double tol, bool strict_zero = false) {
      bool ok = strict_zero ? worst == 0.0 : worst <= tol;
      all = all && ok;
      std::printf("       %-52s worst=%.3g tol=%.3g %s\n", name, worst, tol, ok ? "ok" : "FAIL");
    };

    PlanarArmParams vp;
    vp.gravity_mode = GravityMode::Vertical;
    PlanarTwoLink arm(vp);

    {  // P2 skew symmetry, 1000 random states
      double worst = 0;
      for (int r = 0; r < 1000; ++r) {
        Eigen::VectorXd q = randn(rng, 2), qd = randn(rng, 2);
        const double h = 1e-6;
        Eigen::MatrixXd Hdot = Eigen::MatrixXd::Zero(2, 2);
        for (int k = 0; k < 2; ++k) {
          Eigen::VectorXd qp = q, qm = q;
          qp(k) += h;
          qm(k) -= h;
          Hdot += (arm.inertia(qp) - arm.inertia(qm)) / (2 * h) * qd(k);
        }
        Eigen::MatrixXd C = arm.coriolis(q, qd);
        // compare against the analytic rate to keep FD error out of the budget
        Eigen::MatrixXd S = Hdot - C - C.transpose();
        worst = std::max(worst, S.cwiseAbs().maxCoeff());
      }
      sub("inertia-rate/Coriolis skew symmetry", worst, 1e-10 + 1e-7);
    }
    {  // analytic-rate version meets the pinned 1e-10
      double worst = 0;
      for (int r = 0; r < 1000; ++r) {
        Eigen::VectorXd q = randn(rng, 2), qd = randn(rng, 2);
        // Hdot analytic: dH/dq2 * qd2, since H depends on q2 only
        double s2 = std::sin(q(1));
        Eigen::MatrixXd dH(2, 2);
        dH << -2.25 * s2, -1.125 * s2, -1.125 * s2, 0;
        Eigen::MatrixXd Hdot = dH * qd(1);
        Eigen::MatrixXd C = arm.coriolis(q, qd);
        worst = std::max(worst, (Hdot - C - C.transpose()).cwiseAbs().maxCoeff());
      }
      sub("skew symmetry against the analytic inertia rate", worst, 1e-10);
    }
    {  // P3 regressor identity
      double worst = 0;
      for (int r = 0; r < 1000; ++r) {
        Eigen::VectorXd q = randn(rng, 2), zeta = randn(rng, 2);
        Eigen::VectorXd a = randn(rng, 2).cwiseAbs() + Eigen::Vector2d(0.5, 0.5);
        worst = std::max(worst, (arm.regressor(q, zeta) * a -
                                 arm.jacobian_base(q, a).transpose() * zeta)
                                    .cwiseAbs()
                                    .maxCoeff());
      }
      sub("kinematic regressor identity", worst, 1e-12);
    }
    {  // Jacobian vs FD, 100 states
      double worst = 0;
      for (int r = 0; r < 100; ++r) {
        Eigen::VectorXd q = randn(rng, 2);
        Eigen::MatrixXd J = arm.jacobian_base(q);
        const double h = 1e-7;
        for (int k = 0; k < 2; ++k) {
          Eigen::VectorXd qp = q, qm = q;
          qp(k) += h;
          qm(k) -= h;
          worst = std::max(worst, ((arm.tool_base(qp) - arm.tool_base(qm)) / (2 * h) - J.col(k))
                                      .cwiseAbs()
                                      .maxCoeff());
        }
      }
      sub("Jacobian vs finite differences", worst, 1e-6);
    }
    {  // formation gradient vs FD of the potential
      const FormationGraph& g = square.network.graph;
      double worst = 0;
      for (int r = 0; r < 20; ++r) {
        Eigen::VectorXd x = 2 * randn(rng, 8);
        Eigen::VectorXd grad = g.gradient(x);
        const double h = 1e-6;
        for (int j = 0; j < 8; ++j) {
          Eigen::VectorXd xp = x, xm = x;
          xp(j) += h;
          xm(j) -= h;
          double fd = (0.5 * g.edge_errors(xp).squaredNorm() -
                       0.5 * g.edge_errors(xm).squaredNorm()) /
                      (2 * h);
          worst = std::max(worst, std::abs(grad(j) - fd));
        }
      }
      sub("formation gradient vs finite differences", worst, 1e-6);
    }
    {  // energy balance under u = G (kinetic energy invariant), xi(0) != 0
      FormationGraph g(4, 2, Flavor::Distance);
      g.add_edge(0, 1, 1.0);
      g.add_edge(1, 2, 1.0);
      g.add_edge(2, 3, 1.0);
      g.add_edge(3, 0, 1.0);
      g.add_edge(0, 2, std::sqrt(2.0));
      Network net{g, {}, {}, {}, {}, Controller(Variant::Exact, {})};
      Eigen::MatrixXd bases(4, 2);
      bases << 0, 0, 3, 0, 3, 3, 0, 3;
      for (int i = 0; i < 4; ++i) {
        auto a = std::make_shared<PlanarTwoLink>(vp);
        a->set_base(bases.row(i).transpose(), Eigen::Matrix2d::Identity());
        net.arms.push_back(a);
        Eigen::VectorXd q0(2);
        q0 << kPi / 4 + i * kPi / 2, kPi / 2;
        net.q0.push_back(q0);
        net.xi0.push_back(Eigen::Vector2d(0.4, -0.2));
      }
      SimConfig cfg;
      cfg.duration = 2.0;
      ControlOverride gonly = [&](int agent, double, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return net.arms[agent]->gravity(q);
      };
      RunResult res = simulate(net, cfg, gonly);
      auto kin = [&](const Eigen::VectorXd& qs, const Eigen::VectorXd& xis) {
        double E = 0;
        for (int i = 0; i < 4; ++i)
          E += 0.5 * xis.segment(2 * i, 2)
                   .dot(net.arms[i]->inertia(qs.segment(2 * i, 2)) * xis.segment(2 * i, 2));
        return E;
      };
      double drift = std::abs(kin(res.trace.q.back(), res.trace.xi.back()) -
                              kin(res.trace.q.front(), res.trace.xi.front())) /
                     cfg.duration;
      sub("energy balance under gravity-canceling torque", drift, 1e-6);
    }
    {  // PID form vs integrator form along a recorded trajectory
      Gains gains{100.0, 40.0, 1.0, 0.0};
      FormationGraph g(4, 2, Flavor::Distance);
      g.add_edge(0, 1, 1.0);
      g.add_edge(1, 2, 1.0);
      g.add_edge(2, 3, 1.0);
      g.add_edge(3, 0, 1.0);
      g.add_edge(0, 2, std::sqrt(2.0));
      Network comp{g, {}, {}, {}, {}, Controller(Variant::Approx, gains)};
      Network pid{g, {}, {}, {}, {}, Controller::pid_form(Variant::Approx, gains)};
      Eigen::MatrixXd bases(4, 2);
      bases << 0, 0, 3, 0, 3, 3, 0, 3;
      for (int i = 0; i < 4; ++i) {
        auto a1 = std::make_shared<PlanarTwoLink>(vp);
        auto a2 = std::make_shared<PlanarTwoLink>(vp);
        a1->set_base(bases.row(i).transpose(), Eigen::Matrix2d::Identity());
        a2->set_base(bases.row(i).transpose(), Eigen::Matrix2d::Identity());
        comp.arms.push_back(a1);
        pid.arms.push_back(a2);
        Eigen::VectorXd q0(2);
        q0 << kPi / 4 + i * kPi / 2, kPi / 2;
        comp.q0.push_back(q0);
        pid.q0.push_back(q0);
        comp.ahat0.push_back(Eigen::Vector2d(1.8, 1.2));
        pid.ahat0.push_back(Eigen::Vector2d(1.8, 1.2));
      }
      SimConfig cfg;
      cfg.duration = 10.0;
      RunResult a = simulate(comp, cfg);
      RunResult b = simulate(pid, cfg);
      double worst = 0;
      for (size_t k = 0; k < a.trace.u.size(); ++k)
        worst = std::max(worst, (a.trace.u[k] - b.trace.u[k]).cwiseAbs().maxCoeff());
      sub("PID form vs integrator form", worst, 1e-6);
    }
    {  // local vs global frame, rotated bases, 100 states total
      const FormationGraph& g = square.network.graph;
      Gains gains{100.0, 40.0, 1.0, 0.02};
      Controller ctl(Variant::Adaptive, gains);
      double worst = 0;
      for (double deg : {0.0, 30.0, 60.0, -30.0}) {
        for (int r = 0; r < 25; ++r) {
          PlanarTwoLink a;
          a.set_base(randn(rng, 2), rotation2d(deg * kPi / 180.0));
          Eigen::VectorXd q = randn(rng, 2), xi = randn(rng, 2);
          Eigen::VectorXd eta = randn(rng, 2);
          Eigen::VectorXd ahat = randn(rng, 2).cwiseAbs() + Eigen::Vector2d(1, 1);
          Eigen::VectorXd x = 2 * randn(rng, 8);
          Eigen::VectorXd z = g.relative_positions(x);
          int agent = r % 4;
          ControlResult w = ctl.compute(a, q, xi, agent_gradient(g, agent, z), eta, ahat);
          Eigen::MatrixXd Rt = a.base_rotation().transpose();
          Eigen::VectorXd zl(z.size());
          for (int k = 0; k < g.num_edges(); ++k) zl.segment(2 * k, 2) = Rt * z.segment(2 * k, 2);
          ControlResult l = local_frame_control(a, ctl, g, agent, q, xi, zl, eta, ahat);
          worst = std::max(worst, (w.u - l.u).cwiseAbs().maxCoeff());
        }
      }
      sub("local-frame vs global-frame control", worst, 1e-9);
    }
    {  // adaptive freeze at zero gradient: exact zero
      Gains gains{100.0, 40.0, 1.0, 0.02};
      Controller ctl(Variant::Adaptive, gains);
      double worst = 0;
      for (int r = 0; r < 100; ++r) {
        Eigen::VectorXd q = randn(rng, 2), xi = randn(rng, 2);
        ControlResult res = ctl.compute(arm, q, xi, Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero(), Eigen::Vector2d(2, 2));
        worst = std::max(worst, res.ahat_dot.cwiseAbs().maxCoeff());
      }
      sub("adaptation freezes at zero formation gradient", worst, 0.0, /*strict_zero=*/true);
    }
    {  // determinism, byte identical
      SimConfig cfg = square.sim;
      cfg.duration = 0.5;
      RunResult a = simulate(square.network, cfg);
      RunResult b = simulate(square.network, cfg);
      double worst = 0;
      bool same = a.trace.t.size() == b.trace.t.size();
      for (size_t k = 0; same && k < a.trace.q.size(); ++k) {
        worst = std::max(worst, (a.trace.q[k] - b.trace.q[k]).cwiseAbs().maxCoeff());
        worst = std::max(worst, (a.trace.u[k] - b.trace.u[k]).cwiseAbs().maxCoeff());
      }
      if (!same) worst = INFINITY;
      sub("repeated runs byte-identical", worst, 0.0, /*strict_zero=*/true);
    }
    tally(line(5, "property suites", all, all ? "all sub-checks hold" : "see sub-checks above"));
  }

  // ---- criterion 6: nonzero centroid drift --------------------------------
  {
    RunResult res = simulate(square.network, square.sim);
    double drift = res.centroid_drift.norm();
    tally(line(6, "end-effector centroid is not stationary", drift > 0,
               "||p(30)-p(0)||=" + fmt(drift) + " (> 0)"));
  }

  std::printf("%d of 6 criteria failed\n", failures);
  return failures;
}
