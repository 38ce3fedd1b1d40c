#pragma once

#include <Eigen/Dense>
#include <vector>

namespace formctl {

// Edge-error flavor of the formation task.
//  Distance:     e_k = ||z_k||^2 - d_k^2   (scalar per edge, shape up to rotation+translation)
//  Displacement: e_k = z_k - z_k^*         (vector per edge, shape up to translation)
enum class Flavor { Distance, Displacement };

struct Edge {
  int tail = 0;  // +1 row in the incidence matrix
  int head = 0;  // -1 row
};

// Undirected rigidity graph over N agents embedded in R^m, with one desired
// quantity per edge. Stacked vectors follow agent order: x = (x_1, ..., x_N),
// z = (z_1, ..., z_E) with z_k = x_tail - x_head.
class FormationGraph {
 public:
  FormationGraph(int num_agents, int ambient_dim, Flavor flavor);

  // Distance flavor: desired inter-agent distance (not squared).
  void add_edge(int tail, int head, double distance);
  // Displacement flavor: desired relative position z_k^*.
  void add_edge(int tail, int head, const Eigen::VectorXd& desired_relative);

  // Optional reference positions (N x m), one row per agent. Used for rigidity
  // checks and as the grid anchor of certificate estimation. For Distance
  // flavor it must reproduce the desired distances.
  void set_reference(const Eigen::MatrixXd& positions);

  // Throws std::invalid_argument with a precise message on the first failed
  // structural check (index range, self-loops, duplicates, edge count vs.
  // 2N-3 / 3N-6, reference consistency).
  void validate() const;

  int num_agents() const { return n_; }
  int ambient_dim() const { return m_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  Flavor flavor() const { return flavor_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double desired_distance(int k) const { return desired_dist_[k]; }
  const Eigen::VectorXd& desired_relative(int k) const { return desired_rel_[k]; }

  bool has_reference() const { return reference_.size() > 0; }
  const Eigen::MatrixXd& reference() const { return reference_; }
  // z^* stacked (mE), computed from the reference positions.
  Eigen::VectorXd reference_relative() const;

  // N x E incidence matrix B, entries in {-1, 0, +1}; B^T 1 = 0.
  Eigen::MatrixXd incidence() const;
  // Bbar = B (kron) I_m, mN x mE.
  Eigen::MatrixXd incidence_blown() const;

  // z = Bbar^T x  (mE from mN).
  Eigen::VectorXd relative_positions(const Eigen::VectorXd& x) const;

  // Edge errors from stacked positions; E entries (Distance) or mE
  // (Displacement).
  Eigen::VectorXd edge_errors(const Eigen::VectorXd& x) const;
  Eigen::VectorXd errors_from_relative(const Eigen::VectorXd& z) const;

  // Stacked per-agent gradient of the formation potential
  // V = 1/2 sum_k ||e_k||^2:  Distance ehat = 2 Bbar D_z e, Displacement
  // ehat = Bbar e. Returns mN vector.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient_from_relative(const Eigen::VectorXd& z) const;

  // Distance flavor: D_z^T Bbar^T (E x mN), the Jacobian of e w.r.t. x up to
  // the leading factor 2. Displacement flavor: Bbar^T itself (mE x mN).
  Eigen::MatrixXd rigidity_matrix(const Eigen::VectorXd& z) const;

  // Numeric rank test of the rigidity matrix at the reference configuration:
  // rank == mN - m(m+1)/2 (Distance) resp. mN - m (Displacement).
  bool infinitesimally_rigid(double tol = 1e-9) const;

 private:
  int n_;
  int m_;
  Flavor flavor_;
  std::vector<Edge> edges_;
  std::vector<double> desired_dist_;
  std::vector<Eigen::VectorXd> desired_rel_;
  Eigen::MatrixXd reference_;  // N x m or empty
};

}  // namespace formctl
