#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "formctl/controller.hpp"
#include "formctl/graph.hpp"
#include "formctl/manipulator.hpp"

namespace formctl {

struct SimConfig {
  double dt = 1e-3;
  double duration = 30.0;
  int record_stride = 10;     // record every stride-th step (plus t=0)
  double sigma_floor = 1e-3;  // singularity-proximity warning threshold
};

// The multi-agent closed loop: one graph, N arms, one shared control law.
struct Network {
  FormationGraph graph;
  std::vector<std::shared_ptr<Manipulator>> arms;
  std::vector<Eigen::VectorXd> q0;
  // Initial joint velocities; empty means all zero.
  std::vector<Eigen::VectorXd> xi0;
  // Initial kinematic-parameter guesses (Naive/Approx/Adaptive); empty means
  // "use the true parameters".
  std::vector<Eigen::VectorXd> ahat0;
  Controller controller;
};

// Sampled signals, one entry per record instant; vectors stacked over agents
// (q, xi, u, eta, ahat) or edges (e).
struct Trace {
  int num_agents = 0;
  int dof = 0;
  int task_dim = 0;
  int num_edges = 0;
  bool has_eta = false;
  bool has_ahat = false;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q, xi, x, e, ehat, u, eta, ahat;
  std::vector<double> min_sigma;
};

struct RunResult {
  Trace trace;
  bool blew_up = false;
  double blowup_time = 0;
  int singularity_warnings = 0;  // recorded samples with min_sigma < floor
  double min_sigma = 0;
  Eigen::VectorXd final_e;
  double final_xi_norm = 0;
  Eigen::VectorXd centroid_drift;  // task-space centroid(T) - centroid(0)
};

// Optional replacement of the control law (diagnostics and tests); returns the
// torque for one agent. The compensator/adaptation states are frozen when an
// override is active.
using ControlOverride = std::function<Eigen::VectorXd(
    int agent, double t, const Eigen::VectorXd& q, const Eigen::VectorXd& xi,
    const Eigen::VectorXd& ehat_world)>;

// Fixed-step RK4 on the full network state; control evaluated inside every
// stage (no zero-order hold). Deterministic: identical inputs give
// bit-identical traces.
RunResult simulate(const Network& net, const SimConfig& cfg,
                   const ControlOverride& override = nullptr);

// Scalar diagnostics over a finished run.
struct TailStats {
  double max_abs_e = 0;   // sup over the tail window of max_k |e_k|
  double max_xi = 0;      // sup over the tail window of ||xi||
};
TailStats tail_stats(const Trace& trace, double window);

// Count of recorded steps where the given series increases by more than tol.
int monotonicity_violations(const std::vector<double>& series, double tol);

}  // namespace formctl
