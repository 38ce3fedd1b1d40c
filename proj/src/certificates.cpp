#include "formctl/certificates.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace formctl {

namespace {

double opnorm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Block-diagonal D_v (mE x E) of an mE-stacked vector.
Eigen::MatrixXd block_dz(const Eigen::VectorXd& v, int m, int E) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m * E, E);
  for (int k = 0; k < E; ++k) D.block(m * k, k, m, 1) = v.segment(m * k, m);
  return D;
}

}  // namespace

CertificateReport estimate_certificate(const FormationGraph& graph,
                                       const std::vector<std::shared_ptr<Manipulator>>& arms,
                                       const GridSpec& grid, Variant variant,
                                       const Gains& gains) {
  graph.validate();
  if (graph.flavor() != Flavor::Distance)
    throw std::invalid_argument("certificate estimation supports the Distance flavor only");
  if (!graph.has_reference())
    throw std::invalid_argument("certificate estimation needs reference positions");
  const int N = graph.num_agents();
  const int m = graph.ambient_dim();
  const int E = graph.num_edges();
  if (static_cast<int>(arms.size()) != N)
    throw std::invalid_argument("need one arm per agent");
  for (const auto& a : arms)
    if (a->dof() != 2 || a->task_dim() != 2)
      throw std::invalid_argument("certificate grid assumes 2-DOF planar arms");
  if (grid.samples < 1) throw std::invalid_argument("sample count must be positive");

  CertificateReport rep;
  const double alpha = gains.alpha;
  const double ki = gains.ki;

  // P1 sandwich over a full joint revolution (shape depends on q2 only).
  rep.c_min = std::numeric_limits<double>::infinity();
  for (const auto& arm : arms) {
    for (double q2 = 0; q2 < 2 * M_PI - 1e-12; q2 += grid.q_step) {
      Eigen::Vector2d q(0.0, q2);
      Eigen::MatrixXd H = arm->inertia(q);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      rep.c_min = std::min(rep.c_min, es.eigenvalues().minCoeff());
      rep.c_max_eig = std::max(rep.c_max_eig, es.eigenvalues().maxCoeff());
      rep.c_max = std::max(rep.c_max, H.cwiseAbs().rowwise().sum().maxCoeff());
    }
  }

  std::vector<double> q1_lo = grid.q1_lo;
  if (q1_lo.empty())
    for (int i = 0; i < N; ++i) q1_lo.push_back(i * M_PI / 2);
  if (static_cast<int>(q1_lo.size()) != N)
    throw std::invalid_argument("q1_lo needs one entry per agent");

  const Eigen::MatrixXd Bbar = graph.incidence_blown();  // mN x mE
  const Eigen::VectorXd zstar = graph.reference_relative();
  const Eigen::MatrixXd BDs = Bbar * block_dz(zstar, m, E);  // mN x E

  std::mt19937 rng(grid.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto randint = [&rng](int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  const int z_steps = static_cast<int>(std::floor(grid.z_span / grid.z_step + 1e-9));
  const int q1_steps = static_cast<int>(std::floor(grid.q1_span / grid.q_step + 1e-9));
  const int q2_steps =
      static_cast<int>(std::floor((grid.q2_hi - grid.q2_lo) / grid.q_step + 1e-9));
  const int a_steps = static_cast<int>(std::floor((grid.a_hi - grid.a_lo) / grid.a_step + 1e-9));

  rep.lambda4 = std::numeric_limits<double>::infinity();
  rep.lambda2 = std::numeric_limits<double>::infinity();

  // q* for the gravity Lipschitz estimate: joint-box centers.
  std::vector<Eigen::Vector2d> q_center(N);
  for (int i = 0; i < N; ++i)
    q_center[i] =
        Eigen::Vector2d(q1_lo[i] + grid.q1_span / 2, (grid.q2_lo + grid.q2_hi) / 2);

  const int n = 2 * N;  // stacked joint dimension
  const double fd = 1e-6;

  for (int s = 0; s < grid.samples; ++s) {
    // z lattice sample around z*, restricted to the error ball.
    Eigen::VectorXd z;
    Eigen::VectorXd e;
    bool found = false;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      z = zstar;
      for (int j = 0; j < z.size(); ++j) z(j) += grid.z_step * randint(-z_steps, z_steps);
      e = graph.errors_from_relative(z);
      if (e.norm() <= grid.e_radius) {
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("error-ball sampling failed; widen the grid");

    // joint and parameter-guess lattice samples
    Eigen::VectorXd qs(n);
    std::vector<Eigen::VectorXd> ahat(N);
    for (int i = 0; i < N; ++i) {
      qs(2 * i) = q1_lo[i] + grid.q_step * randint(0, q1_steps);
      qs(2 * i + 1) = grid.q2_lo + grid.q_step * randint(0, q2_steps);
      Eigen::VectorXd a(2);
      a << grid.a_lo + grid.a_step * randint(0, a_steps),
          grid.a_lo + grid.a_step * randint(0, a_steps);
      ahat[i] = a;
    }
    Eigen::VectorXd xi(n);
    for (int j = 0; j < n; ++j) xi(j) = gauss(rng);
    xi *= std::sqrt(grid.xi_radius_sq) / xi.norm();

    // block matrices over the network
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n), Jh = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n), C = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Jd = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < N; ++i) {
      Eigen::Vector2d qi = qs.segment(2 * i, 2), xii = xi.segment(2 * i, 2);
      J.block(2 * i, 2 * i, 2, 2) = arms[i]->jacobian_world(qi);
      Jh.block(2 * i, 2 * i, 2, 2) = arms[i]->jacobian_world(qi, ahat[i]);
      H.block(2 * i, 2 * i, 2, 2) = arms[i]->inertia(qi);
      C.block(2 * i, 2 * i, 2, 2) = arms[i]->coriolis(qi, xii);
      Eigen::MatrixXd jd = Eigen::MatrixXd::Zero(2, 2);
      for (int k = 0; k < 2; ++k) {
        Eigen::Vector2d qp = qi, qm = qi;
        qp(k) += fd;
        qm(k) -= fd;
        jd += (arms[i]->jacobian_world(qp) - arms[i]->jacobian_world(qm)) / (2 * fd) * xii(k);
      }
      Jd.block(2 * i, 2 * i, 2, 2) = jd;
    }

    Eigen::MatrixXd D = block_dz(z, m, E);
    Eigen::MatrixXd BD = Bbar * D;  // mN x E
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(BD.transpose() * BD);
      rep.lambda3 = std::max(rep.lambda3, es.eigenvalues().maxCoeff());
      rep.lambda1 = std::max(rep.lambda1, 4 * es.eigenvalues().maxCoeff());
    }
    rep.beta31 = std::max(rep.beta31, opnorm(BD));
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e4(BDs.transpose() * (Jh * Jh.transpose()) *
                                                        BDs);
      rep.lambda4 = std::min(rep.lambda4, e4.eigenvalues().minCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(BDs.transpose() * (J * J.transpose()) *
                                                        BDs);
      rep.lambda2 = std::min(rep.lambda2, e2.eigenvalues().minCoeff());
    }
    rep.lambda_j = std::max(rep.lambda_j, opnorm(J) * opnorm(J));
    rep.lambda_jhat = std::max(rep.lambda_jhat, opnorm(Jh) * opnorm(Jh));
    rep.delta = std::max(rep.delta, opnorm(Jh - J));

    // first-derivative factor matrices
    Eigen::MatrixXd f11 = block_dz(Bbar.transpose() * J * xi, m, E).transpose() *
                          Bbar.transpose() * J * H;
    Eigen::MatrixXd f12 = J.transpose() * BD * BD.transpose() * J * H;
    Eigen::MatrixXd f13 = BD.transpose() * Jd * H;
    Eigen::MatrixXd f14 = BD.transpose() * J * C.transpose();
    rep.beta11 = std::max(rep.beta11, opnorm(f11));
    rep.beta12 = std::max(rep.beta12, opnorm(f12));
    rep.beta13 = std::max(rep.beta13, opnorm(f13));
    rep.beta14 = std::max(rep.beta14, opnorm(f14));

    if (ki > 0) {
      Eigen::MatrixXd f22 = H + C.transpose() / ki;
      rep.beta22 = std::max(rep.beta22, opnorm(f22));
      // gravity Lipschitz w.r.t. tool displacement
      double num = 0, den = 0;
      for (int i = 0; i < N; ++i) {
        Eigen::Vector2d qi = qs.segment(2 * i, 2);
        num += (arms[i]->gravity(qi) - arms[i]->gravity(q_center[i])).squaredNorm();
        den += (arms[i]->tool_base(qi) - arms[i]->tool_base(q_center[i])).squaredNorm();
      }
      if (den > 1e-16) rep.kappa2 = std::max(rep.kappa2, std::sqrt(num / den));
    }
    ++rep.z_samples_accepted;
  }

  rep.k11 = rep.beta11 + rep.beta13 + rep.beta14;
  rep.k12 = rep.beta11 + 4 * rep.beta12 + rep.beta13 + rep.beta14;

  // kappa1 from the rigidity lower bound at z*: ||e|| >= 2 sigma+ ||x - x*||
  // transverse to the shape manifold, so ||h - h(q*)|| <= ||e|| / (2 sigma+).
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(BDs.transpose());
    double splus = 0;
    for (int i = svd.singularValues().size() - 1; i >= 0; --i)
      if (svd.singularValues()(i) > 1e-9) {
        splus = svd.singularValues()(i);
        break;
      }
    rep.kappa1 = splus > 0 ? 1.0 / (2 * splus) : 0.0;
  }

  if (ki > 0) {
    rep.beta21 = rep.kappa1 * rep.kappa2 / ki;
    rep.k21 = rep.beta21 * rep.beta21;
    rep.k22 = rep.beta22 * rep.beta22;
    rep.k31 = 0.5 * ki + ki * rep.c_max;
    rep.k32 = 0.5 * ki * rep.beta21 * rep.beta21;
    rep.k33 = ki;
    rep.k41 = rep.beta31 * ki;
    rep.k42 = rep.k11 + rep.beta31 * ki * (1 + rep.c_max + rep.beta21);
    rep.k43 = rep.k12 + rep.beta31 * ki * rep.c_max;
  } else {
    // no compensator subsystem: only the first-derivative constants survive
    rep.k42 = rep.k11;
    rep.k43 = rep.k12;
  }

  rep.alpha_max = rep.c_min / rep.c_max;
  rep.delta_star = rep.lambda4 / (4 * rep.lambda_jhat * rep.lambda3);
  rep.epsilon = 1.0 / (2.2 * (1.0 + rep.k31 + alpha * rep.k41));

  auto add = [&rep](const std::string& name, double lhs, double rhs) {
    rep.conditions.push_back({name, lhs, rhs, lhs > rhs});
  };
  add("c_min/c_max > alpha", rep.alpha_max, alpha);
  const double inv_eps = 1.0 / rep.epsilon;
  switch (variant) {
    case Variant::Exact:
      add("lambda2*KP - k11 > 1", rep.lambda2 * gains.kp - rep.k11, 1.0);
      add("KD - alpha*k12 > 1", gains.kd - alpha * rep.k12, 1.0);
      add("KD > 2*c_max*lambda1*lambdaJ", gains.kd, 2 * rep.c_max * rep.lambda1 * rep.lambda_j);
      rep.kp_min = (rep.k11 + 1) / rep.lambda2;
      rep.kd_min = 1 + alpha * rep.k12;
      break;
    case Variant::Approx: {
      add("delta_star > delta", rep.delta_star, rep.delta);
      double ecoef = alpha * rep.lambda4 - 4 * alpha * rep.lambda_jhat * rep.lambda3 * rep.delta;
      add("KP*(alpha*lambda4 - 4*alpha*lambdaJhat*lambda3*delta) - k21/eps - k32 - alpha*k42 > 1",
          gains.kp * ecoef - inv_eps * rep.k21 - rep.k32 - alpha * rep.k42, 1.0);
      add("KD - k22/eps - k33 - alpha*k43 - KP*lambda3*delta > 1",
          gains.kd - inv_eps * rep.k22 - rep.k33 - alpha * rep.k43 -
              gains.kp * rep.lambda3 * rep.delta,
          1.0);
      add("1/(2*eps) - k31 - alpha*k41 > 1", 0.5 * inv_eps - rep.k31 - alpha * rep.k41, 1.0);
      rep.kp_min = ecoef > 0
                       ? (1 + inv_eps * rep.k21 + rep.k32 + alpha * rep.k42) / ecoef
                       : std::numeric_limits<double>::infinity();
      rep.kd_min = 1 + inv_eps * rep.k22 + rep.k33 + alpha * rep.k43 +
                   gains.kp * rep.lambda3 * rep.delta;
      break;
    }
    case Variant::Adaptive:
      add("alpha*lambda4*KP - k21/eps - k32 - alpha*k42 > 1",
          alpha * rep.lambda4 * gains.kp - inv_eps * rep.k21 - rep.k32 - alpha * rep.k42, 1.0);
      add("KD - k22/eps - k33 - alpha*k43 > 1",
          gains.kd - inv_eps * rep.k22 - rep.k33 - alpha * rep.k43, 1.0);
      add("1/(2*eps) - k31 - alpha*k41 > 1", 0.5 * inv_eps - rep.k31 - alpha * rep.k41, 1.0);
      rep.kp_min = rep.lambda4 > 0
                       ? (1 + inv_eps * rep.k21 + rep.k32 + alpha * rep.k42) /
                             (alpha * rep.lambda4)
                       : std::numeric_limits<double>::infinity();
      rep.kd_min = 1 + inv_eps * rep.k22 + rep.k33 + alpha * rep.k43;
      break;
    case Variant::Naive:
      throw std::invalid_argument("no stability certificate exists for the Naive variant");
  }
  rep.all_ok = true;
  for (const auto& c : rep.conditions) rep.all_ok = rep.all_ok && c.ok;
  return rep;
}

std::string format_report(const CertificateReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "inertia sandwich:   c_min=" << r.c_min << "  c_max=" << r.c_max
     << "  (eigenvalue max " << r.c_max_eig << ")\n";
  os << "spectra:            lambda1=" << r.lambda1 << "  lambda2=" << r.lambda2
     << "  lambda3=" << r.lambda3 << "  lambda4=" << r.lambda4 << "\n";
  os << "                    lambdaJ=" << r.lambda_j << "  lambdaJhat=" << r.lambda_jhat << "\n";
  os << "first-deriv bounds: beta11=" << r.beta11 << "  beta12=" << r.beta12
     << "  beta13=" << r.beta13 << "  beta14=" << r.beta14 << "\n";
  os << "                    k11=" << r.k11 << "  k12=" << r.k12 << "\n";
  os << "compensator bounds: kappa1=" << r.kappa1 << "  kappa2=" << r.kappa2
     << "  beta21=" << r.beta21 << "  beta22=" << r.beta22 << "  beta31=" << r.beta31 << "\n";
  os << "                    k21=" << r.k21 << "  k22=" << r.k22 << "  k31=" << r.k31
     << "  k32=" << r.k32 << "  k33=" << r.k33 << "\n";
  os << "                    k41=" << r.k41 << "  k42=" << r.k42 << "  k43=" << r.k43 << "\n";
  os << "derived:            alpha_max=" << r.alpha_max << "  delta=" << r.delta
     << "  delta_star=" << r.delta_star << "  epsilon=" << r.epsilon << "\n";
  os << "minimal gains:      kp_min=" << r.kp_min << "  kd_min=" << r.kd_min << "\n";
  os << "samples accepted:   " << r.z_samples_accepted << "\n";
  os << "conditions:\n";
  for (const auto& c : r.conditions)
    os << "  [" << (c.ok ? "pass" : "FAIL") << "] " << c.name << "   (lhs=" << c.lhs
       << ", rhs=" << c.rhs << ", margin=" << c.lhs - c.rhs << ")\n";
  os << "overall: " << (r.all_ok ? "certified on the sampled region" : "NOT satisfied") << "\n";
  return os.str();
}

std::string format_report_kv(const CertificateReport& r) {
  std::ostringstream os;
  os.precision(12);
  auto kv = [&os](const char* k, double v) { os << k << "=" << v << "\n"; };
  kv("c_min", r.c_min);
  kv("c_max", r.c_max);
  kv("c_max_eig", r.c_max_eig);
  kv("lambda1", r.lambda1);
  kv("lambda2", r.lambda2);
  kv("lambda3", r.lambda3);
  kv("lambda4", r.lambda4);
  kv("lambdaJ", r.lambda_j);
  kv("lambdaJhat", r.lambda_jhat);
  kv("beta11", r.beta11);
  kv("beta12", r.beta12);
  kv("beta13", r.beta13);
  kv("beta14", r.beta14);
  kv("k11", r.k11);
  kv("k12", r.k12);
  kv("kappa1", r.kappa1);
  kv("kappa2", r.kappa2);
  kv("beta21", r.beta21);
  kv("beta22", r.beta22);
  kv("beta31", r.beta31);
  kv("k21", r.k21);
  kv("k22", r.k22);
  kv("k31", r.k31);
  kv("k32", r.k32);
  kv("k33", r.k33);
  kv("k41", r.k41);
  kv("k42", r.k42);
  kv("k43", r.k43);
  kv("alpha_max", r.alpha_max);
  kv("delta", r.delta);
  kv("delta_star", r.delta_star);
  kv("epsilon", r.epsilon);
  kv("kp_min", r.kp_min);
  kv("kd_min", r.kd_min);
  for (const auto& c : r.conditions) {
    os << "condition." << c.name << "=" << (c.ok ? "pass" : "fail") << "\n";
    os << "margin." << c.name << "=" << c.lhs - c.rhs << "\n";
  }
  os << "all_ok=" << (r.all_ok ? 1 : 0) << "\n";
  return os.str();
}

LyapunovSample lyapunov_values(const FormationGraph& graph,
                               const std::vector<std::shared_ptr<Manipulator>>& arms,
                               const std::vector<Eigen::VectorXd>& q,
                               const std::vector<Eigen::VectorXd>& xi,
                               const std::vector<Eigen::VectorXd>& eta,
                               const std::vector<Eigen::VectorXd>& ahat,
                               const Gains& gains, double eps,
                               const std::vector<Eigen::VectorXd>& q_star,
                               double e_coeff) {
  const int N = graph.num_agents();
  const int m = graph.ambient_dim();
  Eigen::VectorXd x(m * N);
  for (int i = 0; i < N; ++i) x.segment(m * i, m) = arms[i]->tool_world(q[i]);
  Eigen::VectorXd e = graph.edge_errors(x);
  Eigen::VectorXd ehat = graph.gradient(x);

  LyapunovSample out;
  out.u1 = e_coeff * (gains.kp + gains.alpha * gains.kd) * e.squaredNorm();
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd H = arms[i]->inertia(q[i]);
    Eigen::MatrixXd J = arms[i]->jacobian_world(q[i]);
    out.u1 += 0.5 * xi[i].dot(H * xi[i]) +
              gains.alpha * ehat.segment(m * i, m).dot(J * H * xi[i]);
  }
  out.v_eta = 0;
  if (gains.ki > 0 && !eta.empty()) {
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd eta_star = arms[i]->gravity(q_star[i]) / gains.ki;
      Eigen::VectorXd tilde = eta[i] - eta_star - arms[i]->inertia(q[i]) * xi[i];
      out.v_eta += 0.5 / gains.ki * tilde.squaredNorm();
    }
  }
  out.u2 = out.u1 + (eps > 0 ? out.v_eta / eps : 0.0);
  out.u3 = out.u2;
  if (!ahat.empty()) {
    for (int i = 0; i < N; ++i)
      out.u3 += 0.5 * gains.kp * (ahat[i] - arms[i]->kinematic_params()).squaredNorm();
  }
  return out;
}

}  // namespace formctl
