#pragma once

#include <Eigen/Dense>

#include "formctl/graph.hpp"
#include "formctl/manipulator.hpp"

namespace formctl {

// Exact:    u = -KP J(q,a)^T ehat - KD xi + G(q)            (true Jacobian, exact gravity)
// Naive:    u = -KP J(q,ahat)^T ehat - KD xi + Ghat(q)      (nominal gravity, no compensator)
// Approx:   u = -KP J(q,ahat)^T ehat - KD xi + KI eta,      eta' = -KI eta + u
// Adaptive: Approx with ahat adapted online through the kinematic regressor.
enum class Variant { Exact, Naive, Approx, Adaptive };

struct Gains {
  double kp = 0;
  double kd = 0;
  double ki = 0;
  double alpha = 0;  // adaptation leak / Lyapunov cross weight
};

struct ControlResult {
  Eigen::VectorXd u;
  Eigen::VectorXd eta_dot;   // empty when the variant carries no compensator state
  Eigen::VectorXd ahat_dot;  // empty unless Adaptive
};

class Controller {
 public:
  Controller(Variant variant, const Gains& gains);

  // Same closed loop in PID coordinates: the integrator state Q accumulates
  // y = Lambda J^T ehat + xi and u = -KP J^T ehat - KD xi - KIbar Q. Used to
  // cross-check the compensator form (eta = -KD Q when eta(0) = Q(0) = 0).
  static Controller pid_form(Variant variant, const Gains& gains);

  bool is_pid_form() const { return pid_form_; }

  Variant variant() const { return variant_; }
  const Gains& gains() const { return gains_; }

  // Gravity model error of the Naive variant: Ghat = nominal_mass_scale * G.
  void set_nominal_mass_scale(double s) { nominal_mass_scale_ = s; }
  double nominal_mass_scale() const { return nominal_mass_scale_; }

  bool has_compensator() const {
    return (variant_ == Variant::Approx || variant_ == Variant::Adaptive) && gains_.ki > 0;
  }
  bool has_adaptation() const { return variant_ == Variant::Adaptive; }

  // One agent, one instant. ehat_world is the agent's block of the formation
  // gradient in the world frame; eta/ahat are that agent's integrator and
  // parameter-estimate states (pass empty vectors when unused).
  ControlResult compute(const Manipulator& arm, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& xi, const Eigen::VectorXd& ehat_world,
                        const Eigen::VectorXd& eta, const Eigen::VectorXd& ahat) const;

 private:
  Variant variant_;
  Gains gains_;
  double nominal_mass_scale_ = 1.0;
  bool pid_form_ = false;
};

// The compensator form rewritten as PID output feedback:
//   u = -KP J^T ehat - KD xi - KIbar * integral_0^t (Lambda J^T ehat + xi)
// with Lambda = KP/KD and KIbar = KI*KD, valid when eta(0) = 0.
struct PidGains {
  double lambda = 0;
  double kibar = 0;
};
PidGains pid_equivalent_gains(const Gains& g);

// Residual of the pointwise identity eta' + KD (Lambda J^T ehat + xi) = 0 that
// underlies the PID correspondence; zero up to round-off for Approx/Adaptive.
double pid_identity_residual(const Manipulator& arm, const Controller& ctl,
                             const Eigen::VectorXd& q, const Eigen::VectorXd& xi,
                             const Eigen::VectorXd& ehat_world, const Eigen::VectorXd& eta,
                             const Eigen::VectorXd& ahat);

// The agent's block of the formation gradient (world frame) from stacked
// relative positions z.
Eigen::VectorXd agent_gradient(const FormationGraph& graph, int agent,
                               const Eigen::VectorXd& z);

// Control computed exclusively from base-frame quantities: z_local must hold
// the incident relative positions already rotated into the agent's base frame
// (stacked mE, non-incident edges ignored). Distance flavor only; equals the
// world-frame law exactly.
ControlResult local_frame_control(const Manipulator& arm, const Controller& ctl,
                                  const FormationGraph& graph, int agent,
                                  const Eigen::VectorXd& q, const Eigen::VectorXd& xi,
                                  const Eigen::VectorXd& z_local, const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& ahat);

}  // namespace formctl
