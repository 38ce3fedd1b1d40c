#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "formctl/graph.hpp"
#include "formctl/manipulator.hpp"

using namespace formctl;

namespace {

// Square with one diagonal: edges (1,2),(2,3),(3,4),(4,1),(1,3); side d,
// diagonal d*sqrt(2). Agent indices are 0-based in the library.
FormationGraph square_graph(double side = 0.4) {
  FormationGraph g(4, 2, Flavor::Distance);
  g.add_edge(0, 1, side);
  g.add_edge(1, 2, side);
  g.add_edge(2, 3, side);
  g.add_edge(3, 0, side);
  g.add_edge(0, 2, side * std::sqrt(2.0));
  Eigen::MatrixXd ref(4, 2);
  ref << 0, 0, side, 0, side, side, 0, side;
  g.set_reference(ref);
  return g;
}

Eigen::VectorXd stack_square(double side, double ox = 0, double oy = 0) {
  Eigen::VectorXd x(8);
  x << ox, oy, ox + side, oy, ox + side, oy + side, ox, oy + side;
  return x;
}

}  // namespace

TEST_CASE("incidence matrix matches the hand-written square matrix") {
  FormationGraph g = square_graph();
  Eigen::MatrixXd B = g.incidence();
  Eigen::MatrixXd expect(4, 5);
  // columns = edges (1,2),(2,3),(3,4),(4,1),(1,3); +1 tail, -1 head
  expect << 1, 0, 0, -1, 1,   //
      -1, 1, 0, 0, 0,         //
      0, -1, 1, 0, -1,        //
      0, 0, -1, 1, 0;
  CHECK((B - expect).cwiseAbs().maxCoeff() == 0.0);
  // every column sums to zero
  CHECK(B.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
  // blown-up incidence is B (kron) I_2
  Eigen::MatrixXd Bb = g.incidence_blown();
  REQUIRE(Bb.rows() == 8);
  REQUIRE(Bb.cols() == 10);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 5; ++k)
      for (int d = 0; d < 2; ++d) CHECK(Bb(2 * i + d, 2 * k + d) == B(i, k));
}

TEST_CASE("distance errors vanish at the reference and scale quadratically") {
  FormationGraph g = square_graph(0.4);
  CHECK(g.edge_errors(stack_square(0.4, 3.7, -1.2)).cwiseAbs().maxCoeff() < 1e-15);
  // side 0.8: e_side = 0.64 - 0.16 = 0.48, e_diag = 1.28 - 0.32 = 0.96
  Eigen::VectorXd e = g.edge_errors(stack_square(0.8));
  for (int k = 0; k < 4; ++k) CHECK(e(k) == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(e(4) == doctest::Approx(0.96).epsilon(1e-12));
}

TEST_CASE("distance errors are invariant under rotation and translation") {
  FormationGraph g = square_graph();
  Eigen::VectorXd x(8);
  x << 0.1, -0.3, 0.9, 0.2, 0.6, 1.1, -0.2, 0.8;
  Eigen::Matrix2d R = rotation2d(0.83);
  Eigen::Vector2d t(2.5, -7.0);
  Eigen::VectorXd xr(8);
  for (int i = 0; i < 4; ++i) xr.segment<2>(2 * i) = R * x.segment<2>(2 * i) + t;
  CHECK((g.edge_errors(x) - g.edge_errors(xr)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gradient matches finite differences of the potential") {
  FormationGraph g = square_graph();
  Eigen::VectorXd x(8);
  x << 0.3, 0.1, 1.2, -0.4, 0.9, 0.8, -0.5, 0.6;
  Eigen::VectorXd grad = g.gradient(x);
  const double h = 1e-6;
  for (int j = 0; j < 8; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    double fd = (0.5 * g.edge_errors(xp).squaredNorm() - 0.5 * g.edge_errors(xm).squaredNorm()) /
                (2 * h);
    CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gradient_from_relative agrees with gradient") {
  FormationGraph g = square_graph();
  Eigen::VectorXd x(8);
  x << 0.3, 0.1, 1.2, -0.4, 0.9, 0.8, -0.5, 0.6;
  Eigen::VectorXd z = g.relative_positions(x);
  CHECK((g.gradient(x) - g.gradient_from_relative(z)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((g.edge_errors(x) - g.errors_from_relative(z)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("square-plus-diagonal is infinitesimally rigid with rank 2N-3") {
  FormationGraph g = square_graph();
  g.validate();
  CHECK(g.infinitesimally_rigid());
  Eigen::VectorXd z = g.reference_relative();
  Eigen::MatrixXd Rg = g.rigidity_matrix(z);
  REQUIRE(Rg.rows() == 5);
  REQUIRE(Rg.cols() == 8);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(Rg).rank() == 5);  // 2*4 - 3
}

TEST_CASE("validation rejects malformed graphs") {
  SUBCASE("too few edges for rigidity") {
    FormationGraph g(4, 2, Flavor::Distance);
    g.add_edge(0, 1, 1.0);
    g.add_edge(1, 2, 1.0);
    g.add_edge(2, 3, 1.0);
    g.add_edge(3, 0, 1.0);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("self loop") {
    FormationGraph g(4, 2, Flavor::Distance);
    g.add_edge(1, 1, 1.0);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("index out of range") {
    FormationGraph g(4, 2, Flavor::Distance);
    g.add_edge(0, 4, 1.0);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("duplicate edge regardless of orientation") {
    FormationGraph g = square_graph();
    g.add_edge(2, 0, 0.4 * std::sqrt(2.0));
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("reference inconsistent with desired distances") {
    FormationGraph g = square_graph();
    Eigen::MatrixXd ref(4, 2);
    ref << 0, 0, 1, 0, 1, 1, 0, 1;  // side 1 vs desired 0.4
    g.set_reference(ref);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("nonpositive desired distance") {
    FormationGraph g(3, 2, Flavor::Distance);
    g.add_edge(0, 1, -1.0);
    g.add_edge(1, 2, 1.0);
    g.add_edge(2, 0, 1.0);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
}

TEST_CASE("displacement flavor: errors, gradient, rigidity rank 2N-2") {
  FormationGraph g(3, 2, Flavor::Displacement);
  Eigen::Vector2d z12(1, 0), z23(0, 1), z31(-1, -1);
  g.add_edge(0, 1, z12);
  g.add_edge(1, 2, z23);
  g.add_edge(2, 0, z31);
  Eigen::MatrixXd ref(3, 2);
  ref << 1, 1, 0, 1, 0, 0;  // x1 - x2 = (1,0), x2 - x3 = (0,1), x3 - x1 = (-1,-1)
  g.set_reference(ref);
  g.validate();

  Eigen::VectorXd x(6);
  x << 1.3, 1.1, 0.1, 0.9, 0.2, -0.1;
  Eigen::VectorXd e = g.edge_errors(x);
  REQUIRE(e.size() == 6);
  CHECK(e(0) == doctest::Approx(1.3 - 0.1 - 1.0));
  CHECK(e(1) == doctest::Approx(1.1 - 0.9));
  // gradient = Bbar e
  Eigen::VectorXd grad = g.gradient(x);
  const double h = 1e-6;
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    double fd = (0.5 * g.edge_errors(xp).squaredNorm() - 0.5 * g.edge_errors(xm).squaredNorm()) /
                (2 * h);
    CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-6));
  }
  // translation-only null space: rank = mN - m = 4
  Eigen::MatrixXd Rg = g.rigidity_matrix(g.reference_relative());
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(Rg).rank() == 4);
  CHECK(g.infinitesimally_rigid());

  SUBCASE("cycle-inconsistent desired relatives are rejected") {
    FormationGraph bad(3, 2, Flavor::Displacement);
    bad.add_edge(0, 1, z12);
    bad.add_edge(1, 2, z23);
    bad.add_edge(2, 0, Eigen::Vector2d(-1.0, -0.9));
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("tetrahedron over the complete graph on four agents is rigid in 3D") {
  const double s = 0.4;
  FormationGraph g(4, 3, Flavor::Distance);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) g.add_edge(i, j, s);
  Eigen::MatrixXd ref(4, 3);
  ref << 0, 0, 0,                                          //
      s, 0, 0,                                             //
      s / 2, s * std::sqrt(3.0) / 2, 0,                    //
      s / 2, s / (2 * std::sqrt(3.0)), s * std::sqrt(2.0 / 3.0);
  g.set_reference(ref);
  g.validate();
  CHECK(g.infinitesimally_rigid());
  // rank = 3*4 - 6 = 6, i.e. the full edge count
  Eigen::MatrixXd Rg = g.rigidity_matrix(g.reference_relative());
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(Rg).rank() == 6);
}
