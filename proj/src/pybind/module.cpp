#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kslab/analysis.hpp"
#include "kslab/core.hpp"
#include "kslab/elliptic.hpp"
#include "kslab/evolution.hpp"
#include "kslab/steady.hpp"

namespace py = pybind11;
using namespace kslab;

PYBIND11_MODULE(_kslab, m) {
    m.doc() = "radial Keller-Segel laboratory: cumulated-mass evolution, "
              "steady-state continuation, comparison functions";

    py::class_<Params>(m, "Params")
        .def(py::init([](double R, double k, int n) {
                 Params p{R, k, n};
                 p.validate();
                 return p;
             }),
             py::arg("R"), py::arg("k") = 0.0, py::arg("n") = 2)
        .def_readonly("R", &Params::R)
        .def_readonly("k", &Params::k)
        .def_readonly("n", &Params::n);

    py::class_<MassGrid>(m, "MassGrid")
        .def_readonly("L", &MassGrid::L)
        .def_readonly("N", &MassGrid::N)
        .def_readonly("s", &MassGrid::s)
        .def("h", &MassGrid::h);

    py::class_<WState>(m, "WState")
        .def(py::init<>())
        .def_readwrite("t", &WState::t)
        .def_readwrite("w", &WState::w)
        .def_readwrite("z", &WState::z)
        .def_readwrite("m", &WState::m);

    py::class_<RadialProfile>(m, "RadialProfile")
        .def(py::init<>())
        .def(py::init([](std::vector<double> r, std::vector<double> f) {
                 return RadialProfile{std::move(r), std::move(f)};
             }),
             py::arg("r"), py::arg("f"))
        .def_readwrite("r", &RadialProfile::r)
        .def_readwrite("f", &RadialProfile::f);

    m.def("build_mass_grid", &build_mass_grid, py::arg("R"), py::arg("N"));
    m.def("profile_to_w0", &profile_to_w0, py::arg("u0"), py::arg("grid"));
    m.def("w_to_u", &w_to_u, py::arg("state"), py::arg("grid"));
    m.def("total_mass", &total_mass, py::arg("state"));
    m.def("radial_nodes", &radial_nodes, py::arg("grid"));

    m.def("solve_helmholtz_radial", &solve_helmholtz_radial, py::arg("u"), py::arg("params"));
    m.def("solve_z_bvp", &solve_z_bvp, py::arg("w"), py::arg("params"), py::arg("grid"));
    m.def("ring_green_lower_bound", &ring_green_lower_bound, py::arg("params"),
          py::arg("M"), py::arg("n_source_radii") = 24);

    py::class_<StepControls>(m, "StepControls")
        .def(py::init<>())
        .def_readwrite("dt_init", &StepControls::dt_init)
        .def_readwrite("dt_min", &StepControls::dt_min)
        .def_readwrite("dt_max", &StepControls::dt_max)
        .def_readwrite("cfl", &StepControls::cfl)
        .def_readwrite("T_end", &StepControls::T_end)
        .def_readwrite("u_blowup", &StepControls::u_blowup)
        .def_readwrite("tol_newton", &StepControls::tol_newton);

    py::enum_<Outcome>(m, "Outcome")
        .value("Global", Outcome::Global)
        .value("Blowup", Outcome::Blowup)
        .value("Undecided", Outcome::Undecided);

    py::class_<DiagnosticsRow>(m, "DiagnosticsRow")
        .def_readonly("t", &DiagnosticsRow::t)
        .def_readonly("sup_u", &DiagnosticsRow::sup_u)
        .def_readonly("F", &DiagnosticsRow::F)
        .def_readonly("D", &DiagnosticsRow::D)
        .def_readonly("y2max", &DiagnosticsRow::y2max)
        .def_readonly("dt", &DiagnosticsRow::dt);

    py::class_<ClassificationResult>(m, "ClassificationResult")
        .def_readonly("outcome", &ClassificationResult::outcome)
        .def_readonly("t_star", &ClassificationResult::t_star)
        .def_readonly("sup_u", &ClassificationResult::sup_u)
        .def_readonly("t_final", &ClassificationResult::t_final)
        .def_readonly("steps", &ClassificationResult::steps)
        .def_readonly("diagnostics", &ClassificationResult::diagnostics)
        .def_readonly("mass_bit_stable", &ClassificationResult::mass_bit_stable)
        .def_readonly("worst_monotonicity", &ClassificationResult::worst_monotonicity)
        .def_readonly("worst_z_low", &ClassificationResult::worst_z_low)
        .def_readonly("worst_z_high_excess", &ClassificationResult::worst_z_high_excess);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("snapshots", &Trajectory::snapshots)
        .def_readonly("result", &Trajectory::result);

    m.def("default_blowup_threshold", &default_blowup_threshold, py::arg("m"),
          py::arg("R"), py::arg("N"));
    m.def("step", &step, py::arg("state"), py::arg("dt"), py::arg("params"), py::arg("grid"));
    m.def("evolve", &evolve, py::arg("w0"), py::arg("params"), py::arg("grid"),
          py::arg("controls"), py::arg("max_snapshots") = 33, py::arg("diag_samples") = 200,
          py::call_guard<py::gil_scoped_release>());
    m.def("energy", &energy, py::arg("u"), py::arg("v"), py::arg("params"));
    m.def("dissipation", &dissipation, py::arg("u"), py::arg("v"), py::arg("params"));
    m.def("bernstein_monitor", &bernstein_monitor, py::arg("state"), py::arg("grid"),
          py::arg("alpha"));
    m.def("sup_u_of", &sup_u_of, py::arg("state"), py::arg("grid"));

    py::class_<BranchPoint>(m, "BranchPoint")
        .def_readonly("a", &BranchPoint::a)
        .def_readonly("lambda_", &BranchPoint::lambda)
        .def_readonly("m", &BranchPoint::m)
        .def_readonly("vmax", &BranchPoint::vmax)
        .def_readonly("profile", &BranchPoint::profile)
        .def_readonly("residual", &BranchPoint::residual);

    py::class_<Branch>(m, "Branch")
        .def_readonly("points", &Branch::points)
        .def_readonly("failed_a", &Branch::failed_a);

    py::class_<ShootResult>(m, "ShootResult")
        .def_readonly("v", &ShootResult::v)
        .def_readonly("v_end", &ShootResult::v_end)
        .def_readonly("vp_end", &ShootResult::vp_end)
        .def_readonly("diverged", &ShootResult::diverged)
        .def_readonly("crossed_zero", &ShootResult::crossed_zero);

    py::class_<BranchExtremum>(m, "BranchExtremum")
        .def_readonly("value", &BranchExtremum::value)
        .def_readonly("a", &BranchExtremum::a)
        .def_readonly("lambda_", &BranchExtremum::lambda)
        .def_readonly("m", &BranchExtremum::m);

    py::class_<StateCount>(m, "StateCount")
        .def_readonly("count", &StateCount::count)
        .def_readonly("resolution_ok", &StateCount::resolution_ok);

    py::class_<MassBoundCheck>(m, "MassBoundCheck")
        .def_readonly("holds", &MassBoundCheck::holds)
        .def_readonly("slack", &MassBoundCheck::slack)
        .def_readonly("bound", &MassBoundCheck::bound);

    py::class_<CriticalMassTable>(m, "CriticalMassTable")
        .def_readonly("M_star", &CriticalMassTable::M_star)
        .def_readonly("M_star_upper", &CriticalMassTable::M_star_upper);

    m.def("shoot", &shoot, py::arg("a"), py::arg("lambda"), py::arg("params"), py::arg("M"));
    m.def("solve_lambda", &solve_lambda, py::arg("a"), py::arg("params"),
          py::arg("M") = 8192, py::call_guard<py::gil_scoped_release>());
    m.def("steady_mass", &steady_mass, py::arg("point"), py::arg("params"));
    m.def("branch_trace", &branch_trace, py::arg("params"), py::arg("a_grid"),
          py::arg("M") = 8192, py::arg("jobs") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("m_max", &m_max, py::arg("branch"), py::arg("M") = 8192,
          py::call_guard<py::gil_scoped_release>());
    m.def("lambda_max", &lambda_max, py::arg("branch"), py::arg("M") = 8192,
          py::call_guard<py::gil_scoped_release>());
    m.def("count_states", &count_states, py::arg("branch"), py::arg("m"),
          py::arg("resolution") = 0.0);
    m.def("check_mass_bound", &check_mass_bound, py::arg("point"), py::arg("params"),
          py::arg("tol") = 1e-3);
    m.def("critical_mass_table", &critical_mass_table, py::arg("n"), py::arg("R"),
          py::arg("k"));
    m.def("unit_sphere_measure", &unit_sphere_measure, py::arg("n"));

    py::register_exception<ConstructionError>(m, "ConstructionError");

    py::class_<Supersolution>(m, "Supersolution")
        .def_readonly("s0", &Supersolution::s0)
        .def_readonly("b", &Supersolution::b)
        .def_readonly("epsilon", &Supersolution::epsilon)
        .def_readonly("c1", &Supersolution::c1)
        .def_readonly("c2", &Supersolution::c2)
        .def_readonly("mbar", &Supersolution::mbar)
        .def_readonly("b_hat", &Supersolution::b_hat)
        .def_readonly("wbar", &Supersolution::wbar);

    py::class_<PowerlawSubsolution>(m, "PowerlawSubsolution")
        .def_readonly("values", &PowerlawSubsolution::values)
        .def_readonly("valid", &PowerlawSubsolution::valid);

    py::class_<OrderCheck>(m, "OrderCheck")
        .def_readonly("ordered", &OrderCheck::ordered)
        .def_readonly("first_violation_s", &OrderCheck::first_violation_s)
        .def_readonly("first_violation_t", &OrderCheck::first_violation_t)
        .def_readonly("worst_gap", &OrderCheck::worst_gap);

    py::class_<ZLinearBounds>(m, "ZLinearBounds")
        .def_readonly("C_low", &ZLinearBounds::C_low)
        .def_readonly("C_high", &ZLinearBounds::C_high)
        .def_readonly("sup_w_over_s", &ZLinearBounds::sup_w_over_s)
        .def_readonly("hypothesis_ok", &ZLinearBounds::hypothesis_ok);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("family", &SweepRow::family)
        .def_readonly("m", &SweepRow::m)
        .def_readonly("outcome", &SweepRow::outcome)
        .def_readonly("t_star", &SweepRow::t_star)
        .def_readonly("sup_u", &SweepRow::sup_u)
        .def_readonly("F_final", &SweepRow::F_final);

    py::class_<SweepBracket>(m, "SweepBracket")
        .def_readonly("family", &SweepBracket::family)
        .def_readonly("largest_all_global", &SweepBracket::largest_all_global)
        .def_readonly("smallest_all_blowup", &SweepBracket::smallest_all_blowup);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("rows", &SweepResult::rows)
        .def_readonly("brackets", &SweepResult::brackets);

    m.def("construct_supersolution", &construct_supersolution, py::arg("params"),
          py::arg("c1"), py::arg("grid"));
    m.def("verify_supersolution_inequality", &verify_supersolution_inequality,
          py::arg("sup"), py::arg("c2"), py::arg("grid"));
    m.def("powerlaw_subsolution", &powerlaw_subsolution, py::arg("delta"),
          py::arg("beta"), py::arg("m"), py::arg("grid"));
    m.def(
        "compare_order",
        [](const std::vector<WState>& snapshots, std::optional<std::vector<double>> lower,
           std::optional<std::vector<double>> upper, double m, const MassGrid& grid) {
            return compare_order(snapshots, lower ? &*lower : nullptr,
                                 upper ? &*upper : nullptr, m, grid);
        },
        py::arg("snapshots"), py::arg("lower"), py::arg("upper"), py::arg("m"),
        py::arg("grid"));
    m.def("check_z_linear_bounds", &check_z_linear_bounds, py::arg("snapshots"),
          py::arg("params"), py::arg("grid"));
    m.def("make_profile", &make_profile, py::arg("family"), py::arg("m"),
          py::arg("params"), py::arg("grid"));
    m.def("classify_mass_sweep", &classify_mass_sweep, py::arg("params"),
          py::arg("families"), py::arg("m_list"), py::arg("grid"), py::arg("controls"),
          py::arg("refine_rounds") = 0, py::arg("jobs") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("default_c1", &default_c1, py::arg("params"), py::arg("green_M") = 4096,
          py::arg("calib_N") = 1024, py::arg("calib_T") = 10.0,
          py::call_guard<py::gil_scoped_release>());
}
