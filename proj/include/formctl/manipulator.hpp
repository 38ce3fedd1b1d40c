#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

namespace formctl {

// Horizontal: the task plane is orthogonal to gravity, G == 0.
// Vertical: gravity acts along the negative second (2D) / third (3D) task axis.
enum class GravityMode { Horizontal, Vertical };

// One fixed-base manipulator. Joint-space dynamics
//   H(q) qdd + C(q, qd) qd + G(q) = u
// with tool position h(q) in the base frame and x = R h(q) + x0 in the world
// frame. The kinematic parameter vector a (link lengths) enters the Jacobian
// linearly: J_base(q, a)^T zeta = Z(q, zeta) a.
class Manipulator {
 public:
  virtual ~Manipulator() = default;

  virtual int dof() const = 0;
  virtual int task_dim() const = 0;
  virtual int param_count() const = 0;
  virtual Eigen::VectorXd kinematic_params() const = 0;

  virtual Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qd) const = 0;
  virtual Eigen::VectorXd gravity(const Eigen::VectorXd& q) const = 0;

  // Tool position and Jacobian in the base frame, optionally with substituted
  // kinematic parameters.
  virtual Eigen::VectorXd tool_base(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q,
                                        const Eigen::VectorXd& a) const = 0;
  // Z(q, zeta) with zeta expressed in the base frame.
  virtual Eigen::MatrixXd regressor(const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& zeta) const = 0;

  void set_base(const Eigen::VectorXd& position, const Eigen::MatrixXd& rotation);
  const Eigen::VectorXd& base_position() const { return base_position_; }
  const Eigen::MatrixXd& base_rotation() const { return base_rotation_; }

  // World-frame tool position x = R h(q) + x0 and Jacobian R J_base.
  Eigen::VectorXd tool_world(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd jacobian_world(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd jacobian_world(const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& a) const;

  // Smallest singular value of the world Jacobian; singularity proximity proxy.
  double min_singular_value(const Eigen::VectorXd& q) const;

 protected:
  void init_base(int task_dim);

 private:
  Eigen::VectorXd base_position_;
  Eigen::MatrixXd base_rotation_;
};

// Planar revolute-revolute arm with link masses m1, m2, link inertias Ic1, Ic2
// about the centers of mass, link lengths l1, l2 and center offsets lc1, lc2.
struct PlanarArmParams {
  double m1 = 1.2;
  double m2 = 1.0;
  double Ic1 = 0.2250;
  double Ic2 = 0.1875;
  double l1 = 1.5;
  double l2 = 1.5;
  double lc1 = 0.75;
  double lc2 = 0.75;
  double g = 9.81;
  GravityMode gravity_mode = GravityMode::Horizontal;
};

class PlanarTwoLink final : public Manipulator {
 public:
  explicit PlanarTwoLink(const PlanarArmParams& p = {});

  int dof() const override { return 2; }
  int task_dim() const override { return 2; }
  int param_count() const override { return 2; }
  Eigen::VectorXd kinematic_params() const override;

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qd) const override;
  Eigen::VectorXd gravity(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd tool_base(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& a) const override;
  Eigen::MatrixXd regressor(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& zeta) const override;

  // Analytic d/dt J(q, a) given joint rates; used by certificate estimation.
  Eigen::MatrixXd jacobian_dot(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd) const;

  const PlanarArmParams& params() const { return p_; }

 private:
  PlanarArmParams p_;
};

// Spatial arm: yaw joint q1 about the vertical axis carrying a two-link chain
// (q2, q3) in the rotating vertical plane. Links modelled as point masses at
// the center offsets plus constant joint rotor inertias; C from Christoffel
// symbols of the closed-form H.
struct SpatialArmParams {
  double m1 = 1.2;
  double m2 = 1.0;
  double Ir1 = 0.2;
  double Ir2 = 0.2250;
  double Ir3 = 0.1875;
  double l1 = 1.5;
  double l2 = 1.5;
  double lc1 = 0.75;
  double lc2 = 0.75;
  double g = 9.81;
  GravityMode gravity_mode = GravityMode::Horizontal;
};

class SpatialThreeLink final : public Manipulator {
 public:
  explicit SpatialThreeLink(const SpatialArmParams& p = {});

  int dof() const override { return 3; }
  int task_dim() const override { return 3; }
  int param_count() const override { return 2; }
  Eigen::VectorXd kinematic_params() const override;

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qd) const override;
  Eigen::VectorXd gravity(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd tool_base(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& a) const override;
  Eigen::MatrixXd regressor(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& zeta) const override;

  const SpatialArmParams& params() const { return p_; }

 private:
  // dH/dq as an n x n x n tensor flattened over the last index.
  std::vector<Eigen::MatrixXd> inertia_partials(const Eigen::VectorXd& q) const;
  SpatialArmParams p_;
};

// Extension hook: any plant given as callables. All quantities in the base
// frame; world transforms come from the stored base pose.
struct CustomModelFns {
  int dof = 0;
  int task_dim = 0;
  int param_count = 0;
  Eigen::VectorXd kinematic_params;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> inertia;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> coriolis;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gravity;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> tool;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> jacobian;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> regressor;
};

class CustomModel final : public Manipulator {
 public:
  explicit CustomModel(CustomModelFns fns);

  int dof() const override { return fns_.dof; }
  int task_dim() const override { return fns_.task_dim; }
  int param_count() const override { return fns_.param_count; }
  Eigen::VectorXd kinematic_params() const override { return fns_.kinematic_params; }

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const override { return fns_.inertia(q); }
  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qd) const override {
    return fns_.coriolis(q, qd);
  }
  Eigen::VectorXd gravity(const Eigen::VectorXd& q) const override { return fns_.gravity(q); }
  Eigen::VectorXd tool_base(const Eigen::VectorXd& q) const override { return fns_.tool(q); }
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q) const override {
    return fns_.jacobian(q, fns_.kinematic_params);
  }
  Eigen::MatrixXd jacobian_base(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& a) const override {
    return fns_.jacobian(q, a);
  }
  Eigen::MatrixXd regressor(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& zeta) const override {
    return fns_.regressor(q, zeta);
  }

 private:
  CustomModelFns fns_;
};

// Generic Christoffel construction C(q, qd) from dH/dq; guarantees that
// dH/dt - 2C is skew-symmetric whenever the partials are exact.
Eigen::MatrixXd christoffel(const std::vector<Eigen::MatrixXd>& dH,
                            const Eigen::VectorXd& qd);

// 2D rotation by angle theta (helper for scenario base poses).
Eigen::Matrix2d rotation2d(double theta);

}  // namespace formctl
