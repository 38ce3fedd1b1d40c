#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>

#include "formctl/certificates.hpp"
#include "formctl/scenario.hpp"
#include "formctl/trace_io.hpp"

using namespace formctl;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitCertificate = 4;

int cmd_simulate(const std::string& scn_path, const std::string& out_dir, double dt_override,
                 double T_override, int seed) {
  (void)seed;  // runs are deterministic; accepted for interface stability
  Scenario sc = load_scenario(scn_path);
  if (dt_override > 0) sc.sim.dt = dt_override;
  if (T_override > 0) sc.sim.duration = T_override;
  RunResult res = simulate(sc.network, sc.sim);
  write_trace(out_dir, res);
  if (res.blew_up) {
    std::cerr << "simulation diverged at t=" << res.blowup_time << " s\n";
    return kExitBlowup;
  }
  std::cout << "t=" << sc.sim.duration << "  max|e|=" << res.final_e.cwiseAbs().maxCoeff()
            << "  |xi|=" << res.final_xi_norm << "  min_sigma=" << res.min_sigma
            << "  sing_warnings=" << res.singularity_warnings
            << "  centroid_drift=" << res.centroid_drift.norm() << "\n";
  std::cout << "trace written to " << out_dir << "\n";
  return 0;
}

int cmd_certify(const std::string& scn_path, const std::string& out_path) {
  Scenario sc = load_scenario(scn_path);
  Variant v = sc.network.controller.variant();
  if (v == Variant::Naive) v = Variant::Approx;
  CertificateReport rep = estimate_certificate(sc.network.graph, sc.network.arms, sc.grid, v,
                                               sc.network.controller.gains());
  std::string text = format_report(rep);
  std::ofstream(out_path) << text;
  std::ofstream(out_path + ".kv") << format_report_kv(rep);
  std::cout << text;
  std::cout << "report written to " << out_path << " (+ .kv)\n";
  return rep.all_ok ? 0 : kExitCertificate;
}

int cmd_plot(const std::string& trace_dir, const std::string& out_dir) {
  Trace tr = read_trace(trace_dir);
  write_plots(out_dir, tr);
  std::cout << "plots written to " << out_dir << "\n";
  return 0;
}

bool report(const char* name, bool ok, double worst, double tol) {
  std::cout << (ok ? "  [pass] " : "  [FAIL] ") << name << "  (worst " << worst << ", tol " << tol
            << ")\n";
  return ok;
}

int cmd_verify(const std::string& scn_path) {
  Scenario sc = load_scenario(scn_path);
  const FormationGraph& g = sc.network.graph;
  const int N = g.num_agents(), m = g.ambient_dim();
  std::mt19937 rng(2024);
  std::normal_distribution<double> gauss(0, 1);
  auto randn = [&](int k) {
    Eigen::VectorXd v(k);
    for (int j = 0; j < k; ++j) v(j) = gauss(rng);
    return v;
  };
  bool all = true;

  {  // formation gradient vs finite differences of the potential
    double worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd x = 2 * randn(m * N);
      Eigen::VectorXd grad = g.gradient(x);
      const double h = 1e-6;
      for (int j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        double fd = (0.5 * g.edge_errors(xp).squaredNorm() -
                     0.5 * g.edge_errors(xm).squaredNorm()) /
                    (2 * h);
        worst = std::max(worst, std::abs(grad(j) - fd));
      }
    }
    all &= report("formation gradient matches finite differences", worst <= 1e-5, worst, 1e-5);
  }
  {  // frame invariance of distance errors
    double worst = 0;
    if (g.flavor() == Flavor::Distance && m == 2) {
      for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd x = 2 * randn(m * N);
        Eigen::Matrix2d R = rotation2d(gauss(rng));
        Eigen::Vector2d tr = randn(2);
        Eigen::VectorXd xr(x.size());
        for (int i = 0; i < N; ++i) xr.segment(2 * i, 2) = R * x.segment(2 * i, 2) + tr;
        worst = std::max(worst, (g.edge_errors(x) - g.edge_errors(xr)).norm());
      }
    }
    all &= report("edge errors invariant under rigid motion", worst <= 1e-9, worst, 1e-9);
  }
  {  // P2 / P3 / Jacobian FD on the scenario's arms
    double p2 = 0, p3 = 0, jfd = 0;
    const auto& arm = *sc.network.arms[0];
    int dof = arm.dof(), td = arm.task_dim(), pc = arm.param_count();
    for (int rep = 0; rep < 1000; ++rep) {
      Eigen::VectorXd q = randn(dof), qd = randn(dof);
      const double h = 1e-7;
      Eigen::MatrixXd Hd = Eigen::MatrixXd::Zero(dof, dof);
      for (int k = 0; k < dof; ++k) {
        Eigen::VectorXd qp = q, qm = q;
        qp(k) += h;
        qm(k) -= h;
        Hd += (arm.inertia(qp) - arm.inertia(qm)) / (2 * h) * qd(k);
      }
      Eigen::MatrixXd C = arm.coriolis(q, qd);
      p2 = std::max(p2, (Hd - C - C.transpose()).cwiseAbs().maxCoeff());
      Eigen::VectorXd zeta = randn(td), a = randn(pc).cwiseAbs() + Eigen::VectorXd::Ones(pc);
      p3 = std::max(p3, (arm.regressor(q, zeta) * a - arm.jacobian_base(q, a).transpose() * zeta)
                            .lpNorm<Eigen::Infinity>());
      if (rep < 100) {
        Eigen::MatrixXd J = arm.jacobian_base(q);
        for (int k = 0; k < dof; ++k) {
          Eigen::VectorXd qp = q, qm = q;
          qp(k) += h;
          qm(k) -= h;
          jfd = std::max(jfd, ((arm.tool_base(qp) - arm.tool_base(qm)) / (2 * h) - J.col(k))
                                  .lpNorm<Eigen::Infinity>());
        }
      }
    }
    all &= report("inertia-rate/Coriolis skew symmetry", p2 <= 1e-6, p2, 1e-6);
    all &= report("kinematic regressor identity", p3 <= 1e-12, p3, 1e-12);
    all &= report("Jacobian matches finite differences", jfd <= 1e-6, jfd, 1e-6);
  }
  {  // determinism on a short run
    SimConfig cfg = sc.sim;
    cfg.duration = std::min(cfg.duration, 50 * cfg.dt);
    RunResult a = simulate(sc.network, cfg);
    RunResult b = simulate(sc.network, cfg);
    bool same = a.trace.t == b.trace.t && a.trace.q.size() == b.trace.q.size();
    double worst = 0;
    for (size_t i = 0; same && i < a.trace.q.size(); ++i)
      worst = std::max(worst, (a.trace.q[i] - b.trace.q[i]).lpNorm<Eigen::Infinity>());
    all &= report("repeated runs identical", same && worst == 0, worst, 0);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed end-effector formation control simulator"};
  app.require_subcommand(1);

  std::string scn, out, trace_dir;
  double dt = 0, T = 0;
  int seed = 0;

  auto* sim = app.add_subcommand("simulate", "integrate a scenario and write its trace");
  sim->add_option("scenario", scn, "scenario file")->required();
  sim->add_option("--out", out, "output trace directory")->required();
  sim->add_option("--dt", dt, "time-step override [s]");
  sim->add_option("--T", T, "duration override [s]");
  sim->add_option("--seed", seed, "reserved; runs are deterministic");

  auto* cert = app.add_subcommand("certify", "estimate bound constants and check gain conditions");
  cert->add_option("scenario", scn, "scenario file")->required();
  cert->add_option("--out", out, "report file path")->required();

  auto* ver = app.add_subcommand("verify", "run the property suites on a scenario");
  ver->add_option("scenario", scn, "scenario file")->required();

  auto* plt = app.add_subcommand("plot", "render SVG charts from a trace directory");
  plt->add_option("trace", trace_dir, "trace directory (from simulate)")->required();
  plt->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scn, out, dt, T, seed);
    if (cert->parsed()) return cmd_certify(scn, out);
    if (ver->parsed()) return cmd_verify(scn);
    if (plt->parsed()) return cmd_plot(trace_dir, out);
  } catch (const ScenarioError& ex) {
    std::cerr << "scenario error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "validation error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
