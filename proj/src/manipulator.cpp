#include "formctl/manipulator.hpp"

#include <cmath>
#include <stdexcept>

namespace formctl {

void Manipulator::init_base(int task_dim) {
  base_position_ = Eigen::VectorXd::Zero(task_dim);
  base_rotation_ = Eigen::MatrixXd::Identity(task_dim, task_dim);
}

void Manipulator::set_base(const Eigen::VectorXd& position, const Eigen::MatrixXd& rotation) {
  if (position.size() != task_dim() || rotation.rows() != task_dim() ||
      rotation.cols() != task_dim())
    throw std::invalid_argument("base pose dimension mismatch");
  base_position_ = position;
  base_rotation_ = rotation;
}

Eigen::VectorXd Manipulator::tool_world(const Eigen::VectorXd& q) const {
  return base_rotation_ * tool_base(q) + base_position_;
}

Eigen::MatrixXd Manipulator::jacobian_world(const Eigen::VectorXd& q) const {
  return base_rotation_ * jacobian_base(q);
}

Eigen::MatrixXd Manipulator::jacobian_world(const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& a) const {
  return base_rotation_ * jacobian_base(q, a);
}

double Manipulator::min_singular_value(const Eigen::VectorXd& q) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian_base(q));
  return svd.singularValues().tail(1)(0);
}

Eigen::MatrixXd christoffel(const std::vector<Eigen::MatrixXd>& dH, const Eigen::VectorXd& qd) {
  int n = static_cast<int>(qd.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        C(i, j) += 0.5 * (dH[k](i, j) + dH[j](i, k) - dH[i](j, k)) * qd(k);
  return C;
}

Eigen::Matrix2d rotation2d(double theta) {
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

// ---------------------------------------------------------------------------
// PlanarTwoLink

PlanarTwoLink::PlanarTwoLink(const PlanarArmParams& p) : p_(p) { init_base(2); }

Eigen::VectorXd PlanarTwoLink::kinematic_params() const {
  Eigen::VectorXd a(2);
  a << p_.l1, p_.l2;
  return a;
}

Eigen::MatrixXd PlanarTwoLink::inertia(const Eigen::VectorXd& q) const {
  double c2 = std::cos(q(1));
  Eigen::Matrix2d H;
  double h11 = p_.m1 * p_.lc1 * p_.lc1 + p_.Ic1 +
               p_.m2 * (p_.l1 * p_.l1 + p_.lc2 * p_.lc2 + 2 * p_.l1 * p_.lc2 * c2) + p_.Ic2;
  double h12 = p_.m2 * (p_.lc2 * p_.lc2 + p_.l1 * p_.lc2 * c2) + p_.Ic2;
  double h22 = p_.m2 * p_.lc2 * p_.lc2 + p_.Ic2;
  H << h11, h12, h12, h22;
  return H;
}

Eigen::MatrixXd PlanarTwoLink::coriolis(const Eigen::VectorXd& q,
                                        const Eigen::VectorXd& qd) const {
  double h = p_.m2 * p_.l1 * p_.lc2 * std::sin(q(1));
  Eigen::Matrix2d C;
  C << -h * qd(1), -h * (qd(0) + qd(1)), h * qd(0), 0;
  return C;
}

Eigen::VectorXd PlanarTwoLink::gravity(const Eigen::VectorXd& q) const {
  Eigen::VectorXd G = Eigen::VectorXd::Zero(2);
  if (p_.gravity_mode == GravityMode::Vertical) {
    double c1 = std::cos(q(0)), c12 = std::cos(q(0) + q(1));
    G(0) = (p_.m1 * p_.lc1 + p_.m2 * p_.l1) * p_.g * c1 + p_.m2 * p_.lc2 * p_.g * c12;
    G(1) = p_.m2 * p_.lc2 * p_.g * c12;
  }
  return G;
}

Eigen::VectorXd PlanarTwoLink::tool_base(const Eigen::VectorXd& q) const {
  Eigen::VectorXd x(2);
  x << p_.l1 * std::cos(q(0)) + p_.l2 * std::cos(q(0) + q(1)),
      p_.l1 * std::sin(q(0)) + p_.l2 * std::sin(q(0) + q(1));
  return x;
}

Eigen::MatrixXd PlanarTwoLink::jacobian_base(const Eigen::VectorXd& q) const {
  return jacobian_base(q, kinematic_params());
}

Eigen::MatrixXd PlanarTwoLink::jacobian_base(const Eigen::VectorXd& q,
                                             const Eigen::VectorXd& a) const {
  double s1 = std::sin(q(0)), c1 = std::cos(q(0));
  double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
  Eigen::Matrix2d J;
  J << -a(0) * s1 - a(1) * s12, -a(1) * s12, a(0) * c1 + a(1) * c12, a(1) * c12;
  return J;
}

Eigen::MatrixXd PlanarTwoLink::regressor(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& zeta) const {
  double s1 = std::sin(q(0)), c1 = std::cos(q(0));
  double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
  Eigen::Matrix2d Z;
  Z << -s1 * zeta(0) + c1 * zeta(1), -s12 * zeta(0) + c12 * zeta(1), 0,
      -s12 * zeta(0) + c12 * zeta(1);
  return Z;
}

Eigen::MatrixXd PlanarTwoLink::jacobian_dot(const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& qd) const {
  double s1 = std::sin(q(0)), c1 = std::cos(q(0));
  double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
  double d1 = qd(0), d12 = qd(0) + qd(1);
  Eigen::Matrix2d Jd;
  Jd << -p_.l1 * c1 * d1 - p_.l2 * c12 * d12, -p_.l2 * c12 * d12,
      -p_.l1 * s1 * d1 - p_.l2 * s12 * d12, -p_.l2 * s12 * d12;
  return Jd;
}

// ---------------------------------------------------------------------------
// SpatialThreeLink

SpatialThreeLink::SpatialThreeLink(const SpatialArmParams& p) : p_(p) { init_base(3); }

Eigen::VectorXd SpatialThreeLink::kinematic_params() const {
  Eigen::VectorXd a(2);
  a << p_.l1, p_.l2;
  return a;
}

Eigen::MatrixXd SpatialThreeLink::inertia(const Eigen::VectorXd& q) const {
  double c2 = std::cos(q(1)), c3 = std::cos(q(2));
  double c23 = std::cos(q(1) + q(2));
  double rc1 = p_.lc1 * c2;                     // radial com of link 1
  double rc2 = p_.l1 * c2 + p_.lc2 * c23;       // radial com of link 2
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  H(0, 0) = p_.m1 * rc1 * rc1 + p_.m2 * rc2 * rc2 + p_.Ir1;
  H(1, 1) = p_.m1 * p_.lc1 * p_.lc1 +
            p_.m2 * (p_.l1 * p_.l1 + p_.lc2 * p_.lc2 + 2 * p_.l1 * p_.lc2 * c3) + p_.Ir2;
  H(1, 2) = H(2, 1) = p_.m2 * (p_.lc2 * p_.lc2 + p_.l1 * p_.lc2 * c3);
  H(2, 2) = p_.m2 * p_.lc2 * p_.lc2 + p_.Ir3;
  return H;
}

std::vector<Eigen::MatrixXd> SpatialThreeLink::inertia_partials(const Eigen::VectorXd& q) const {
  double c2 = std::cos(q(1)), s2 = std::sin(q(1));
  double s3 = std::sin(q(2));
  double c23 = std::cos(q(1) + q(2)), s23 = std::sin(q(1) + q(2));
  double rc1 = p_.lc1 * c2;
  double rc2 = p_.l1 * c2 + p_.lc2 * c23;
  std::vector<Eigen::MatrixXd> dH(3, Eigen::Matrix3d::Zero());
  // d/dq2
  dH[1](0, 0) = 2 * p_.m1 * rc1 * (-p_.lc1 * s2) + 2 * p_.m2 * rc2 * (-p_.l1 * s2 - p_.lc2 * s23);
  // d/dq3
  dH[2](0, 0) = 2 * p_.m2 * rc2 * (-p_.lc2 * s23);
  dH[2](1, 1) = -2 * p_.m2 * p_.l1 * p_.lc2 * s3;
  dH[2](1, 2) = dH[2](2, 1) = -p_.m2 * p_.l1 * p_.lc2 * s3;
  return dH;
}

Eigen::MatrixXd SpatialThreeLink::coriolis(const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& qd) const {
  return christoffel(inertia_partials(q), qd);
}

Eigen::VectorXd SpatialThreeLink::gravity(const Eigen::VectorXd& q) const {
  Eigen::VectorXd G = Eigen::VectorXd::Zero(3);
  if (p_.gravity_mode == GravityMode::Vertical) {
    double c2 = std::cos(q(1)), c23 = std::cos(q(1) + q(2));
    G(1) = p_.g * ((p_.m1 * p_.lc1 + p_.m2 * p_.l1) * c2 + p_.m2 * p_.lc2 * c23);
    G(2) = p_.g * p_.m2 * p_.lc2 * c23;
  }
  return G;
}

Eigen::VectorXd SpatialThreeLink::tool_base(const Eigen::VectorXd& q) const {
  double r = p_.l1 * std::cos(q(1)) + p_.l2 * std::cos(q(1) + q(2));
  Eigen::VectorXd x(3);
  x << r * std::cos(q(0)), r * std::sin(q(0)),
      p_.l1 * std::sin(q(1)) + p_.l2 * std::sin(q(1) + q(2));
  return x;
}

Eigen::MatrixXd SpatialThreeLink::jacobian_base(const Eigen::VectorXd& q) const {
  return jacobian_base(q, kinematic_params());
}

Eigen::MatrixXd SpatialThreeLink::jacobian_base(const Eigen::VectorXd& q,
                                                const Eigen::VectorXd& a) const {
  double c1 = std::cos(q(0)), s1 = std::sin(q(0));
  double c2 = std::cos(q(1)), s2 = std::sin(q(1));
  double c23 = std::cos(q(1) + q(2)), s23 = std::sin(q(1) + q(2));
  double r = a(0) * c2 + a(1) * c23;
  double dr2 = -a(0) * s2 - a(1) * s23;  // dr/dq2
  double dz2 = a(0) * c2 + a(1) * c23;   // dz/dq2
  Eigen::Matrix3d J;
  J << -r * s1, dr2 * c1, -a(1) * s23 * c1,
       r * c1, dr2 * s1, -a(1) * s23 * s1,
       0, dz2, a(1) * c23;
  return J;
}

Eigen::MatrixXd SpatialThreeLink::regressor(const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& zeta) const {
  double c1 = std::cos(q(0)), s1 = std::sin(q(0));
  double c2 = std::cos(q(1)), s2 = std::sin(q(1));
  double c23 = std::cos(q(1) + q(2)), s23 = std::sin(q(1) + q(2));
  double w = -s1 * zeta(0) + c1 * zeta(1);  // tangential component
  double v = c1 * zeta(0) + s1 * zeta(1);   // radial component
  Eigen::MatrixXd Z(3, 2);
  Z << c2 * w, c23 * w,
      -s2 * v + c2 * zeta(2), -s23 * v + c23 * zeta(2),
      0, -s23 * v + c23 * zeta(2);
  return Z;
}

// ---------------------------------------------------------------------------
// CustomModel

CustomModel::CustomModel(CustomModelFns fns) : fns_(std::move(fns)) {
  if (!fns_.inertia || !fns_.coriolis || !fns_.gravity || !fns_.tool || !fns_.jacobian ||
      !fns_.regressor)
    throw std::invalid_argument("custom model: all callables must be provided");
  init_base(fns_.task_dim);
}

}  // namespace formctl
