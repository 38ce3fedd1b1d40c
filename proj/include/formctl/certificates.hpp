#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "formctl/controller.hpp"
#include "formctl/graph.hpp"
#include "formctl/manipulator.hpp"

namespace formctl {

// Sampling region for the bound-constant estimation. The z lattice is anchored
// at the reference relatives z* (step z_step, half-extent z_span per
// coordinate) and filtered to the error ball ||e|| <= e_radius; joint samples
// come from per-agent boxes; parameter guesses from [a_lo, a_hi]; velocity
// directions are random with ||xi||^2 = xi_radius_sq.
struct GridSpec {
  double z_step = 0.5;
  double z_span = 4.5;
  double e_radius = 16.0;
  double xi_radius_sq = 4.0;
  std::vector<double> q1_lo;  // per-agent; defaults to (i-1)*pi/2
  double q1_span = 1.0471975511965976;              // pi/3
  double q2_lo = 0.5235987755982988;                // pi/6
  double q2_hi = 1.5707963267948966;                // pi/2
  double q_step = 0.5235987755982988;               // pi/6
  double a_lo = 1.5;
  double a_hi = 2.5;
  double a_step = 0.2;
  int samples = 4000;
  unsigned seed = 12345;
};

struct GainCondition {
  std::string name;
  double lhs = 0;    // value that must exceed rhs
  double rhs = 0;
  bool ok = false;
};

struct CertificateReport {
  // inertia sandwich: c_min ||v||^2 <= v^T H v <= c_max ||v||^2
  double c_min = 0;
  double c_max = 0;      // row-sum (infinity-norm) upper bound
  double c_max_eig = 0;  // extremal eigenvalue over the q grid, for reference
  // spectral constants of the rigidity/Jacobian products over the region
  double lambda1 = 0;     // max eig 4 D_z^T Bbar^T Bbar D_z
  double lambda3 = 0;     // max eig D_z^T Bbar^T Bbar D_z
  double lambda4 = 0;     // min eig D_z*^T Bbar^T J(ahat) J(ahat)^T Bbar D_z*
  double lambda2 = 0;     // as lambda4 with the true parameters
  double lambda_j = 0;    // max eig J J^T (true parameters)
  double lambda_jhat = 0; // max eig J J^T (guessed parameters)
  // first-derivative bound constants
  double beta11 = 0, beta12 = 0, beta13 = 0, beta14 = 0;
  double k11 = 0, k12 = 0;
  // gravity / compensator constants
  double kappa1 = 0, kappa2 = 0;
  double beta21 = 0, beta22 = 0, beta31 = 0;
  double k21 = 0, k22 = 0, k31 = 0, k32 = 0, k33 = 0;
  double k41 = 0, k42 = 0, k43 = 0;
  // derived controller quantities
  double alpha_max = 0;    // c_min / c_max
  double delta = 0;        // Jacobian mismatch bound from the a-range
  double delta_star = 0;   // lambda4 / (4 lambda_jhat lambda3)
  double epsilon = 0;      // largest eps with 1/(2 eps) - k31 - alpha k41 > 1, 10% margin
  double kp_min = 0;       // smallest proportional gain satisfying the error-term inequality
  double kd_min = 0;       // smallest damping gain satisfying the velocity-term inequality
  std::vector<GainCondition> conditions;
  bool all_ok = false;
  int z_samples_accepted = 0;
};

// Estimates every bound constant on the sampled region, then evaluates the
// stability inequalities for the given variant and gains. Requires 2-DOF
// planar arms (the joint boxes are two-dimensional).
CertificateReport estimate_certificate(const FormationGraph& graph,
                                       const std::vector<std::shared_ptr<Manipulator>>& arms,
                                       const GridSpec& grid, Variant variant,
                                       const Gains& gains);

std::string format_report(const CertificateReport& r);          // human-readable
std::string format_report_kv(const CertificateReport& r);       // key=value lines

// Lyapunov candidates evaluated at one network state.
//   U1   = ec (KP + alpha KD) e^T e + 1/2 xi^T H xi + alpha ehat^T J H xi
//   Veta = 1/(2 KI) sum ||eta_i - eta_i^* - H_i xi_i||^2, eta_i^* = G(q_i^*)/KI
//   U2   = U1 + Veta / eps
//   U3   = U2 + KP/2 sum ||ahat_i - a_i||^2
// ec defaults to 1/4; ec = 1/2 makes U1 decay exactly along the true-Jacobian
// closed loop (see tests).
struct LyapunovSample {
  double u1 = 0;
  double v_eta = 0;
  double u2 = 0;
  double u3 = 0;
};
LyapunovSample lyapunov_values(const FormationGraph& graph,
                               const std::vector<std::shared_ptr<Manipulator>>& arms,
                               const std::vector<Eigen::VectorXd>& q,
                               const std::vector<Eigen::VectorXd>& xi,
                               const std::vector<Eigen::VectorXd>& eta,
                               const std::vector<Eigen::VectorXd>& ahat,
                               const Gains& gains, double eps,
                               const std::vector<Eigen::VectorXd>& q_star,
                               double e_coeff = 0.25);

}  // namespace formctl
