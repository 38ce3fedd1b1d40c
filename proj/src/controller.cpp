#include "formctl/controller.hpp"

#include <stdexcept>

namespace formctl {

Controller::Controller(Variant variant, const Gains& gains) : variant_(variant), gains_(gains) {}

Controller Controller::pid_form(Variant variant, const Gains& gains) {
  if (variant != Variant::Approx && variant != Variant::Adaptive)
    throw std::invalid_argument("PID form exists only for the compensator variants");
  Controller c(variant, gains);
  c.pid_form_ = true;
  return c;
}

ControlResult Controller::compute(const Manipulator& arm, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& xi, const Eigen::VectorXd& ehat_world,
                                  const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& ahat) const {
  ControlResult out;
  // Work in the base frame: J_world^T ehat = J_base^T (R^T ehat).
  Eigen::VectorXd zeta = arm.base_rotation().transpose() * ehat_world;
  switch (variant_) {
    case Variant::Exact: {
      out.u = -gains_.kp * arm.jacobian_base(q).transpose() * zeta - gains_.kd * xi +
              arm.gravity(q);
      break;
    }
    case Variant::Naive: {
      out.u = -gains_.kp * arm.jacobian_base(q, ahat).transpose() * zeta - gains_.kd * xi +
              nominal_mass_scale_ * arm.gravity(q);
      break;
    }
    case Variant::Approx:
    case Variant::Adaptive: {
      Eigen::MatrixXd Jt = arm.jacobian_base(q, ahat).transpose();
      out.u = -gains_.kp * Jt * zeta - gains_.kd * xi;
      if (pid_form_ && gains_.ki > 0) {
        PidGains pg = pid_equivalent_gains(gains_);
        out.u -= pg.kibar * eta;  // eta slot holds the PID integral state Q
        out.eta_dot = pg.lambda * Jt * zeta + xi;
      } else if (has_compensator()) {
        out.u += gains_.ki * eta;
        out.eta_dot = -gains_.ki * eta + out.u;
      }
      if (variant_ == Variant::Adaptive) {
        Eigen::MatrixXd Z = arm.regressor(q, zeta);
        out.ahat_dot = -Z.transpose() * (gains_.alpha * Z * ahat - xi);
      }
      break;
    }
  }
  return out;
}

PidGains pid_equivalent_gains(const Gains& g) {
  if (g.kd <= 0) throw std::invalid_argument("PID form needs kd > 0");
  return {g.kp / g.kd, g.ki * g.kd};
}

double pid_identity_residual(const Manipulator& arm, const Controller& ctl,
                             const Eigen::VectorXd& q, const Eigen::VectorXd& xi,
                             const Eigen::VectorXd& ehat_world, const Eigen::VectorXd& eta,
                             const Eigen::VectorXd& ahat) {
  if (!ctl.has_compensator())
    throw std::invalid_argument("PID correspondence needs a compensator variant with ki > 0");
  ControlResult r = ctl.compute(arm, q, xi, ehat_world, eta, ahat);
  PidGains pg = pid_equivalent_gains(ctl.gains());
  Eigen::VectorXd zeta = arm.base_rotation().transpose() * ehat_world;
  Eigen::VectorXd y =
      pg.lambda * arm.jacobian_base(q, ahat).transpose() * zeta + xi;
  return (r.eta_dot + ctl.gains().kd * y).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd agent_gradient(const FormationGraph& graph, int agent,
                               const Eigen::VectorXd& z) {
  int m = graph.ambient_dim();
  Eigen::VectorXd e = graph.errors_from_relative(z);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < graph.num_edges(); ++k) {
    const Edge& ed = graph.edges()[k];
    if (ed.tail != agent && ed.head != agent) continue;
    Eigen::VectorXd contrib;
    if (graph.flavor() == Flavor::Distance)
      contrib = 2.0 * z.segment(m * k, m) * e(k);
    else
      contrib = e.segment(m * k, m);
    g += (ed.tail == agent) ? contrib : -contrib;
  }
  return g;
}

ControlResult local_frame_control(const Manipulator& arm, const Controller& ctl,
                                  const FormationGraph& graph, int agent,
                                  const Eigen::VectorXd& q, const Eigen::VectorXd& xi,
                                  const Eigen::VectorXd& z_local, const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& ahat) {
  if (graph.flavor() != Flavor::Distance)
    throw std::invalid_argument("local-frame control requires the Distance flavor");
  // Scalar edge errors are frame invariant, so the base-frame relatives alone
  // determine the base-frame gradient; feed it through the law with R = I.
  Eigen::VectorXd ehat_local = agent_gradient(graph, agent, z_local);
  Eigen::VectorXd zeta = arm.base_rotation() * ehat_local;  // undone inside compute()
  return ctl.compute(arm, q, xi, zeta, eta, ahat);
}

}  // namespace formctl
