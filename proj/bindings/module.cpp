#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "formctl/certificates.hpp"
#include "formctl/scenario.hpp"
#include "formctl/sim.hpp"
#include "formctl/trace_io.hpp"

namespace py = pybind11;
using namespace formctl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "distributed end-effector formation control: graphs, arm models, "
            "controllers, simulation and gain certificates";

  py::register_exception<ScenarioError>(m, "ScenarioError");

  py::enum_<Flavor>(m, "Flavor")
      .value("Distance", Flavor::Distance)
      .value("Displacement", Flavor::Displacement);

  py::enum_<GravityMode>(m, "GravityMode")
      .value("Horizontal", GravityMode::Horizontal)
      .value("Vertical", GravityMode::Vertical);

  py::enum_<Variant>(m, "Variant")
      .value("Exact", Variant::Exact)
      .value("Naive", Variant::Naive)
      .value("Approx", Variant::Approx)
      .value("Adaptive", Variant::Adaptive);

  py::class_<FormationGraph>(m, "FormationGraph")
      .def(py::init<int, int, Flavor>(), py::arg("num_agents"), py::arg("ambient_dim"),
           py::arg("flavor"))
      .def("add_edge",
           py::overload_cast<int, int, double>(&FormationGraph::add_edge), py::arg("tail"),
           py::arg("head"), py::arg("distance"))
      .def("add_edge",
           py::overload_cast<int, int, const Eigen::VectorXd&>(&FormationGraph::add_edge),
           py::arg("tail"), py::arg("head"), py::arg("desired_relative"))
      .def("set_reference", &FormationGraph::set_reference)
      .def("validate", &FormationGraph::validate)
      .def_property_readonly("num_agents", &FormationGraph::num_agents)
      .def_property_readonly("ambient_dim", &FormationGraph::ambient_dim)
      .def_property_readonly("num_edges", &FormationGraph::num_edges)
      .def_property_readonly("flavor", &FormationGraph::flavor)
      .def("incidence", &FormationGraph::incidence)
      .def("incidence_blown", &FormationGraph::incidence_blown)
      .def("relative_positions", &FormationGraph::relative_positions)
      .def("edge_errors", &FormationGraph::edge_errors)
      .def("gradient", &FormationGraph::gradient)
      .def("rigidity_matrix", &FormationGraph::rigidity_matrix)
      .def("infinitesimally_rigid", &FormationGraph::infinitesimally_rigid,
           py::arg("tol") = 1e-9);

  py::class_<PlanarArmParams>(m, "PlanarArmParams")
      .def(py::init<>())
      .def_readwrite("m1", &PlanarArmParams::m1)
      .def_readwrite("m2", &PlanarArmParams::m2)
      .def_readwrite("Ic1", &PlanarArmParams::Ic1)
      .def_readwrite("Ic2", &PlanarArmParams::Ic2)
      .def_readwrite("l1", &PlanarArmParams::l1)
      .def_readwrite("l2", &PlanarArmParams::l2)
      .def_readwrite("lc1", &PlanarArmParams::lc1)
      .def_readwrite("lc2", &PlanarArmParams::lc2)
      .def_readwrite("g", &PlanarArmParams::g)
      .def_readwrite("gravity_mode", &PlanarArmParams::gravity_mode);

  py::class_<Manipulator, std::shared_ptr<Manipulator>>(m, "Manipulator")
      .def_property_readonly("dof", &Manipulator::dof)
      .def_property_readonly("task_dim", &Manipulator::task_dim)
      .def_property_readonly("param_count", &Manipulator::param_count)
      .def("kinematic_params", &Manipulator::kinematic_params)
      .def("inertia", &Manipulator::inertia)
      .def("coriolis", &Manipulator::coriolis)
      .def("gravity", &Manipulator::gravity)
      .def("tool_base", &Manipulator::tool_base)
      .def("jacobian_base",
           py::overload_cast<const Eigen::VectorXd&>(&Manipulator::jacobian_base, py::const_))
      .def("jacobian_base",
           py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(
               &Manipulator::jacobian_base, py::const_))
      .def("regressor", &Manipulator::regressor)
      .def("set_base", &Manipulator::set_base)
      .def("tool_world", &Manipulator::tool_world)
      .def("jacobian_world",
           py::overload_cast<const Eigen::VectorXd&>(&Manipulator::jacobian_world, py::const_))
      .def("min_singular_value", &Manipulator::min_singular_value);

  py::class_<PlanarTwoLink, Manipulator, std::shared_ptr<PlanarTwoLink>>(m, "PlanarTwoLink")
      .def(py::init<const PlanarArmParams&>(), py::arg("params") = PlanarArmParams{})
      .def("jacobian_dot", &PlanarTwoLink::jacobian_dot);

  py::class_<SpatialArmParams>(m, "SpatialArmParams")
      .def(py::init<>())
      .def_readwrite("m1", &SpatialArmParams::m1)
      .def_readwrite("m2", &SpatialArmParams::m2)
      .def_readwrite("Ir1", &SpatialArmParams::Ir1)
      .def_readwrite("Ir2", &SpatialArmParams::Ir2)
      .def_readwrite("Ir3", &SpatialArmParams::Ir3)
      .def_readwrite("l1", &SpatialArmParams::l1)
      .def_readwrite("l2", &SpatialArmParams::l2)
      .def_readwrite("lc1", &SpatialArmParams::lc1)
      .def_readwrite("lc2", &SpatialArmParams::lc2)
      .def_readwrite("g", &SpatialArmParams::g)
      .def_readwrite("gravity_mode", &SpatialArmParams::gravity_mode);

  py::class_<SpatialThreeLink, Manipulator, std::shared_ptr<SpatialThreeLink>>(
      m, "SpatialThreeLink")
      .def(py::init<const SpatialArmParams&>(), py::arg("params") = SpatialArmParams{});

  py::class_<Gains>(m, "Gains")
      .def(py::init([](double kp, double kd, double ki, double alpha) {
             return Gains{kp, kd, ki, alpha};
           }),
           py::arg("kp") = 0.0, py::arg("kd") = 0.0, py::arg("ki") = 0.0,
           py::arg("alpha") = 0.0)
      .def_readwrite("kp", &Gains::kp)
      .def_readwrite("kd", &Gains::kd)
      .def_readwrite("ki", &Gains::ki)
      .def_readwrite("alpha", &Gains::alpha);

  py::class_<ControlResult>(m, "ControlResult")
      .def_readonly("u", &ControlResult::u)
      .def_readonly("eta_dot", &ControlResult::eta_dot)
      .def_readonly("ahat_dot", &ControlResult::ahat_dot);

  py::class_<Controller>(m, "Controller")
      .def(py::init<Variant, const Gains&>(), py::arg("variant"), py::arg("gains"))
      .def_static("pid_form", &Controller::pid_form)
      .def_property_readonly("variant", &Controller::variant)
      .def_property_readonly("gains", &Controller::gains)
      .def("set_nominal_mass_scale", &Controller::set_nominal_mass_scale)
      .def("compute", &Controller::compute, py::arg("arm"), py::arg("q"), py::arg("xi"),
           py::arg("ehat_world"), py::arg("eta") = Eigen::VectorXd(),
           py::arg("ahat") = Eigen::VectorXd());

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("record_stride", &SimConfig::record_stride)
      .def_readwrite("sigma_floor", &SimConfig::sigma_floor);

  py::class_<Network>(m, "Network")
      .def(py::init([](const FormationGraph& g, std::vector<std::shared_ptr<Manipulator>> arms,
                       std::vector<Eigen::VectorXd> q0, std::vector<Eigen::VectorXd> xi0,
                       std::vector<Eigen::VectorXd> ahat0, const Controller& ctl) {
             return Network{g, std::move(arms), std::move(q0), std::move(xi0),
                            std::move(ahat0), ctl};
           }),
           py::arg("graph"), py::arg("arms"), py::arg("q0"),
           py::arg("xi0") = std::vector<Eigen::VectorXd>{},
           py::arg("ahat0") = std::vector<Eigen::VectorXd>{}, py::arg("controller"))
      .def_readwrite("graph", &Network::graph)
      .def_readwrite("arms", &Network::arms)
      .def_readwrite("q0", &Network::q0)
      .def_readwrite("xi0", &Network::xi0)
      .def_readwrite("ahat0", &Network::ahat0)
      .def_readwrite("controller", &Network::controller);

  py::class_<Trace>(m, "Trace")
      .def_readonly("num_agents", &Trace::num_agents)
      .def_readonly("dof", &Trace::dof)
      .def_readonly("task_dim", &Trace::task_dim)
      .def_readonly("num_edges", &Trace::num_edges)
      .def_readonly("t", &Trace::t)
      .def_readonly("q", &Trace::q)
      .def_readonly("xi", &Trace::xi)
      .def_readonly("x", &Trace::x)
      .def_readonly("e", &Trace::e)
      .def_readonly("ehat", &Trace::ehat)
      .def_readonly("u", &Trace::u)
      .def_readonly("eta", &Trace::eta)
      .def_readonly("ahat", &Trace::ahat)
      .def_readonly("min_sigma", &Trace::min_sigma);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("trace", &RunResult::trace)
      .def_readonly("blew_up", &RunResult::blew_up)
      .def_readonly("blowup_time", &RunResult::blowup_time)
      .def_readonly("singularity_warnings", &RunResult::singularity_warnings)
      .def_readonly("min_sigma", &RunResult::min_sigma)
      .def_readonly("final_e", &RunResult::final_e)
      .def_readonly("final_xi_norm", &RunResult::final_xi_norm)
      .def_readonly("centroid_drift", &RunResult::centroid_drift);

  m.def(
      "simulate",
      [](const Network& net, const SimConfig& cfg) { return simulate(net, cfg); },
      py::arg("network"), py::arg("config"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("z_step", &GridSpec::z_step)
      .def_readwrite("z_span", &GridSpec::z_span)
      .def_readwrite("e_radius", &GridSpec::e_radius)
      .def_readwrite("xi_radius_sq", &GridSpec::xi_radius_sq)
      .def_readwrite("q1_lo", &GridSpec::q1_lo)
      .def_readwrite("q1_span", &GridSpec::q1_span)
      .def_readwrite("q2_lo", &GridSpec::q2_lo)
      .def_readwrite("q2_hi", &GridSpec::q2_hi)
      .def_readwrite("q_step", &GridSpec::q_step)
      .def_readwrite("a_lo", &GridSpec::a_lo)
      .def_readwrite("a_hi", &GridSpec::a_hi)
      .def_readwrite("a_step", &GridSpec::a_step)
      .def_readwrite("samples", &GridSpec::samples)
      .def_readwrite("seed", &GridSpec::seed);

  py::class_<GainCondition>(m, "GainCondition")
      .def_readonly("name", &GainCondition::name)
      .def_readonly("lhs", &GainCondition::lhs)
      .def_readonly("rhs", &GainCondition::rhs)
      .def_readonly("ok", &GainCondition::ok);

  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("c_min", &CertificateReport::c_min)
      .def_readonly("c_max", &CertificateReport::c_max)
      .def_readonly("c_max_eig", &CertificateReport::c_max_eig)
      .def_readonly("lambda1", &CertificateReport::lambda1)
      .def_readonly("lambda2", &CertificateReport::lambda2)
      .def_readonly("lambda3", &CertificateReport::lambda3)
      .def_readonly("lambda4", &CertificateReport::lambda4)
      .def_readonly("lambda_j", &CertificateReport::lambda_j)
      .def_readonly("lambda_jhat", &CertificateReport::lambda_jhat)
      .def_readonly("beta11", &CertificateReport::beta11)
      .def_readonly("beta12", &CertificateReport::beta12)
      .def_readonly("beta13", &CertificateReport::beta13)
      .def_readonly("beta14", &CertificateReport::beta14)
      .def_readonly("k11", &CertificateReport::k11)
      .def_readonly("k12", &CertificateReport::k12)
      .def_readonly("kappa1", &CertificateReport::kappa1)
      .def_readonly("kappa2", &CertificateReport::kappa2)
      .def_readonly("k21", &CertificateReport::k21)
      .def_readonly("k22", &CertificateReport::k22)
      .def_readonly("k31", &CertificateReport::k31)
      .def_readonly("k32", &CertificateReport::k32)
      .def_readonly("k33", &CertificateReport::k33)
      .def_readonly("k41", &CertificateReport::k41)
      .def_readonly("k42", &CertificateReport::k42)
      .def_readonly("k43", &CertificateReport::k43)
      .def_readonly("alpha_max", &CertificateReport::alpha_max)
      .def_readonly("delta", &CertificateReport::delta)
      .def_readonly("delta_star", &CertificateReport::delta_star)
      .def_readonly("epsilon", &CertificateReport::epsilon)
      .def_readonly("kp_min", &CertificateReport::kp_min)
      .def_readonly("kd_min", &CertificateReport::kd_min)
      .def_readonly("conditions", &CertificateReport::conditions)
      .def_readonly("all_ok", &CertificateReport::all_ok)
      .def_readonly("z_samples_accepted", &CertificateReport::z_samples_accepted);

  m.def("estimate_certificate", &estimate_certificate, py::arg("graph"), py::arg("arms"),
        py::arg("grid"), py::arg("variant"), py::arg("gains"),
        py::call_guard<py::gil_scoped_release>());
  m.def("format_report", &format_report);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("model_kind", &Scenario::model_kind)
      .def_readonly("network", &Scenario::network)
      .def_readonly("sim", &Scenario::sim)
      .def_readonly("grid", &Scenario::grid)
      .def_readonly("mass_scale", &Scenario::mass_scale);

  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("name") = "<string>");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("write_trace", &write_trace, py::arg("directory"), py::arg("result"));
  m.def("read_trace", &read_trace, py::arg("directory"));
  m.def("write_plots", &write_plots, py::arg("directory"), py::arg("trace"));
}
