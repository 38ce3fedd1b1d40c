#include "formctl/graph.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace formctl {

namespace {
std::string agent_range_msg(const char* what, int idx, int n) {
  return std::string(what) + " index " + std::to_string(idx + 1) + " outside [1.." +
         std::to_string(n) + "]";
}
}  // namespace

FormationGraph::FormationGraph(int num_agents, int ambient_dim, Flavor flavor)
    : n_(num_agents), m_(ambient_dim), flavor_(flavor) {}

void FormationGraph::add_edge(int tail, int head, double distance) {
  if (flavor_ != Flavor::Distance)
    throw std::invalid_argument("scalar desired distance only valid for Distance flavor");
  edges_.push_back({tail, head});
  desired_dist_.push_back(distance);
}

void FormationGraph::add_edge(int tail, int head, const Eigen::VectorXd& desired_relative) {
  if (flavor_ != Flavor::Displacement)
    throw std::invalid_argument("desired relative vector only valid for Displacement flavor");
  edges_.push_back({tail, head});
  desired_rel_.push_back(desired_relative);
}

void FormationGraph::set_reference(const Eigen::MatrixXd& positions) { reference_ = positions; }

void FormationGraph::validate() const {
  if (n_ < 2) throw std::invalid_argument("graph needs at least 2 agents");
  if (m_ != 2 && m_ != 3) throw std::invalid_argument("ambient dimension must be 2 or 3");
  if (edges_.empty()) throw std::invalid_argument("graph has no edges");
  std::set<std::pair<int, int>> seen;
  for (size_t k = 0; k < edges_.size(); ++k) {
    const Edge& ed = edges_[k];
    if (ed.tail < 0 || ed.tail >= n_)
      throw std::invalid_argument("edge " + std::to_string(k + 1) + ": " +
                                  agent_range_msg("tail", ed.tail, n_));
    if (ed.head < 0 || ed.head >= n_)
      throw std::invalid_argument("edge " + std::to_string(k + 1) + ": " +
                                  agent_range_msg("head", ed.head, n_));
    if (ed.tail == ed.head)
      throw std::invalid_argument("edge " + std::to_string(k + 1) + " is a self-loop");
    auto key = std::minmax(ed.tail, ed.head);
    if (!seen.insert({key.first, key.second}).second)
      throw std::invalid_argument("duplicate edge between agents " +
                                  std::to_string(key.first + 1) + " and " +
                                  std::to_string(key.second + 1));
    if (flavor_ == Flavor::Distance) {
      if (!(desired_dist_[k] > 0))
        throw std::invalid_argument("edge " + std::to_string(k + 1) +
                                    ": desired distance must be positive");
    } else if (desired_rel_[k].size() != m_) {
      throw std::invalid_argument("edge " + std::to_string(k + 1) +
                                  ": desired relative vector has wrong dimension");
    }
  }
  if (flavor_ == Flavor::Distance) {
    int needed = (m_ == 2) ? 2 * n_ - 3 : 3 * n_ - 6;
    if (num_edges() < needed)
      throw std::invalid_argument("Distance flavor in " + std::to_string(m_) + "D needs at least " +
                                  std::to_string(needed) + " edges, got " +
                                  std::to_string(num_edges()));
  }
  if (has_reference()) {
    if (reference_.rows() != n_ || reference_.cols() != m_)
      throw std::invalid_argument("reference positions must be " + std::to_string(n_) + " x " +
                                  std::to_string(m_));
    if (flavor_ == Flavor::Distance) {
      for (size_t k = 0; k < edges_.size(); ++k) {
        double d = (reference_.row(edges_[k].tail) - reference_.row(edges_[k].head)).norm();
        if (std::abs(d - desired_dist_[k]) > 1e-6)
          throw std::invalid_argument("reference positions violate desired distance on edge " +
                                      std::to_string(k + 1));
      }
    } else {
      for (size_t k = 0; k < edges_.size(); ++k) {
        Eigen::VectorXd d =
            (reference_.row(edges_[k].tail) - reference_.row(edges_[k].head)).transpose();
        if ((d - desired_rel_[k]).norm() > 1e-6)
          throw std::invalid_argument("reference positions violate desired relative on edge " +
                                      std::to_string(k + 1));
      }
    }
  } else if (flavor_ == Flavor::Displacement) {
    // Desired relatives must be realizable: z* in range(Bbar^T), i.e. cycle sums vanish.
    Eigen::MatrixXd Bt = incidence_blown().transpose();  // mE x mN
    Eigen::VectorXd zs(m_ * num_edges());
    for (int k = 0; k < num_edges(); ++k) zs.segment(k * m_, m_) = desired_rel_[k];
    Eigen::VectorXd x = Bt.colPivHouseholderQr().solve(zs);
    if ((Bt * x - zs).norm() > 1e-9 * std::max(1.0, zs.norm()))
      throw std::invalid_argument("desired relative vectors are cycle-inconsistent");
  }
}

Eigen::VectorXd FormationGraph::reference_relative() const {
  Eigen::VectorXd z(m_ * num_edges());
  for (int k = 0; k < num_edges(); ++k)
    z.segment(k * m_, m_) =
        (reference_.row(edges_[k].tail) - reference_.row(edges_[k].head)).transpose();
  return z;
}

Eigen::MatrixXd FormationGraph::incidence() const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_, num_edges());
  for (int k = 0; k < num_edges(); ++k) {
    B(edges_[k].tail, k) = 1;
    B(edges_[k].head, k) = -1;
  }
  return B;
}

Eigen::MatrixXd FormationGraph::incidence_blown() const {
  Eigen::MatrixXd Bb = Eigen::MatrixXd::Zero(m_ * n_, m_ * num_edges());
  for (int k = 0; k < num_edges(); ++k) {
    Bb.block(m_ * edges_[k].tail, m_ * k, m_, m_) = Eigen::MatrixXd::Identity(m_, m_);
    Bb.block(m_ * edges_[k].head, m_ * k, m_, m_) = -Eigen::MatrixXd::Identity(m_, m_);
  }
  return Bb;
}

Eigen::VectorXd FormationGraph::relative_positions(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(m_ * num_edges());
  for (int k = 0; k < num_edges(); ++k)
    z.segment(m_ * k, m_) = x.segment(m_ * edges_[k].tail, m_) - x.segment(m_ * edges_[k].head, m_);
  return z;
}

Eigen::VectorXd FormationGraph::edge_errors(const Eigen::VectorXd& x) const {
  return errors_from_relative(relative_positions(x));
}

Eigen::VectorXd FormationGraph::errors_from_relative(const Eigen::VectorXd& z) const {
  if (flavor_ == Flavor::Distance) {
    Eigen::VectorXd e(num_edges());
    for (int k = 0; k < num_edges(); ++k)
      e(k) = z.segment(m_ * k, m_).squaredNorm() - desired_dist_[k] * desired_dist_[k];
    return e;
  }
  Eigen::VectorXd e(m_ * num_edges());
  for (int k = 0; k < num_edges(); ++k)
    e.segment(m_ * k, m_) = z.segment(m_ * k, m_) - desired_rel_[k];
  return e;
}

Eigen::VectorXd FormationGraph::gradient(const Eigen::VectorXd& x) const {
  return gradient_from_relative(relative_positions(x));
}

Eigen::VectorXd FormationGraph::gradient_from_relative(const Eigen::VectorXd& z) const {
  Eigen::VectorXd e = errors_from_relative(z);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m_ * n_);
  for (int k = 0; k < num_edges(); ++k) {
    Eigen::VectorXd contrib;
    if (flavor_ == Flavor::Distance)
      contrib = 2.0 * z.segment(m_ * k, m_) * e(k);
    else
      contrib = e.segment(m_ * k, m_);
    g.segment(m_ * edges_[k].tail, m_) += contrib;
    g.segment(m_ * edges_[k].head, m_) -= contrib;
  }
  return g;
}

Eigen::MatrixXd FormationGraph::rigidity_matrix(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd Bt = incidence_blown().transpose();  // mE x mN
  if (flavor_ == Flavor::Displacement) return Bt;
  Eigen::MatrixXd R(num_edges(), m_ * n_);
  for (int k = 0; k < num_edges(); ++k)
    R.row(k) = z.segment(m_ * k, m_).transpose() * Bt.middleRows(m_ * k, m_);
  return R;
}

bool FormationGraph::infinitesimally_rigid(double tol) const {
  if (!has_reference()) throw std::logic_error("rigidity check needs reference positions");
  Eigen::MatrixXd R = rigidity_matrix(reference_relative());
  int expected = (flavor_ == Flavor::Distance) ? m_ * n_ - m_ * (m_ + 1) / 2 : m_ * n_ - m_;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  int rank = 0;
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * std::max(1.0, smax)) ++rank;
  return rank == expected;
}

}  // namespace formctl
