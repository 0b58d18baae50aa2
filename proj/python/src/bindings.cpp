#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ooc/coordinator.hpp"
#include "ooc/costs.hpp"
#include "ooc/digraph.hpp"
#include "ooc/errors.hpp"
#include "ooc/scenario_io.hpp"
#include "ooc/sim.hpp"
#include "ooc/tracker.hpp"
#include "ooc/trajectory_io.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

// Eigen <-> numpy goes through pybind11/eigen.h; JSON crosses as text and is
// decoded on the Python side.

py::dict spectral_dict(const ooc::Digraph& g) {
    const bool connected = ooc::is_strongly_connected(g);
    py::dict d("laplacian"_a = ooc::laplacian(g), "strongly_connected"_a = connected);
    if (connected) {
        const auto s = ooc::spectral_data(g);
        d["rho"] = s.rho;
        d["rho_min"] = s.rho_min;
        d["lambda2"] = s.lambda2;
    }
    return d;
}

py::dict gains_dict(const ooc::CoordinatorGains& g) {
    return py::dict("beta1"_a = g.beta1, "beta2"_a = g.beta2, "delta"_a = g.delta);
}

Eigen::MatrixXd column_stack(std::size_t rows, std::size_t cols, auto&& at) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = at(r, c);
    return out;
}

template <class E>
void bind_error(py::module_& m, const char* name, py::handle base) {
    py::register_exception<E>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compiled core of the ooc package";

    auto error = py::register_exception<ooc::Error>(m, "Error", PyExc_RuntimeError);
    bind_error<ooc::InvalidGraph>(m, "InvalidGraph", error);
    bind_error<ooc::NotStronglyConnected>(m, "NotStronglyConnected", error);
    bind_error<ooc::BracketNotFound>(m, "BracketNotFound", error);
    bind_error<ooc::NonConvexDetected>(m, "NonConvexDetected", error);
    bind_error<ooc::InvalidSpectrum>(m, "InvalidSpectrum", error);
    bind_error<ooc::XiUnderflow>(m, "XiUnderflow", error);
    bind_error<ooc::NotHurwitz>(m, "NotHurwitz", error);
    bind_error<ooc::DegenerateRoots>(m, "DegenerateRoots", error);
    bind_error<ooc::SingularSystem>(m, "SingularSystem", error);
    bind_error<ooc::SingularT>(m, "SingularT", error);
    bind_error<ooc::Unsupported>(m, "Unsupported", error);
    bind_error<ooc::InvalidArgument>(m, "InvalidArgument", error);
    bind_error<ooc::SchemaError>(m, "SchemaError", error);
    bind_error<ooc::IoError>(m, "IoError", error);
    bind_error<ooc::Diverged>(m, "Diverged", error);

    py::class_<ooc::Scenario>(m, "Scenario")
        .def_readonly("name", &ooc::Scenario::name)
        .def_readonly("seed", &ooc::Scenario::seed)
        .def_property_readonly("agents", &ooc::Scenario::agents)
        .def_readwrite("horizon", &ooc::Scenario::horizon)
        .def_readwrite("step", &ooc::Scenario::step)
        .def_readwrite("record_every", &ooc::Scenario::record_every)
        .def_readwrite("ablate_internal_model", &ooc::Scenario::ablate_internal_model)
        .def_property_readonly("adjacency", [](const ooc::Scenario& s) { return s.graph.weights(); })
        .def_property_readonly("gains", [](const ooc::Scenario& s) { return gains_dict(ooc::resolve_gains(s)); })
        .def("copy", [](const ooc::Scenario& s) { return s; })
        .def("set", &ooc::set_scalar_field, "field"_a, "value"_a,
             "Overrides a scalar field by name, as the CLI --set option does.")
        .def("validate", &ooc::Scenario::validate)
        .def("__repr__", [](const ooc::Scenario& s) {
            return "<Scenario " + s.name + " agents=" + std::to_string(s.agents()) + ">";
        });

    py::class_<ooc::Trajectory>(m, "Trajectory")
        .def_readonly("s_star", &ooc::Trajectory::s_star)
        .def_readonly("max_substeps_used", &ooc::Trajectory::max_substeps_used)
        .def_readonly("total_substeps", &ooc::Trajectory::total_substeps)
        .def("__len__", &ooc::Trajectory::size)
        .def_property_readonly("times", [](const ooc::Trajectory& t) {
            return Eigen::Map<const Eigen::VectorXd>(t.times.data(), static_cast<Eigen::Index>(t.times.size()))
                .eval();
        })
        .def_property_readonly("header", [](const ooc::Trajectory& t) { return ooc::trajectory_header(t.layout); })
        .def("table", &ooc::trajectory_table, "All recorded columns, ordered as `header`.")
        .def_property_readonly("outputs",
                               [](const ooc::Trajectory& t) {
                                   return column_stack(t.size(), t.layout.agents(),
                                                       [&](auto r, auto c) { return t.output(r, c); });
                               })
        .def_property_readonly("velocities",
                               [](const ooc::Trajectory& t) {
                                   return column_stack(t.size(), t.layout.agents(),
                                                       [&](auto r, auto c) { return t.velocity(r, c); });
                               })
        .def("write_csv", &ooc::write_trajectory, "path"_a);

    m.def("preset_names", &ooc::preset_names);
    m.def("preset_json", [](std::string_view name) { return ooc::preset_json(name).dump(2); }, "name"_a);
    m.def(
        "load_scenario",
        [](std::string_view source) { return ooc::load_scenario(source); }, "source"_a,
        "Loads a preset by name or a JSON scenario file.");
    m.def(
        "parse_scenario", [](std::string_view text) { return ooc::parse_scenario_text(text); }, "text"_a);

    m.def(
        "spectral",
        [](const Eigen::MatrixXd& adjacency) { return spectral_dict(ooc::Digraph(adjacency)); }, "adjacency"_a,
        "Laplacian, stationary left vector rho, rho_min and lambda2 of a weighted digraph "
        "(adjacency[i, j] > 0 when i receives from j).");
    m.def(
        "global_optimum", [](const ooc::Scenario& sc) { return ooc::global_optimum(sc.costs); }, "scenario"_a);
    m.def(
        "aggregate_gradient", [](const ooc::Scenario& sc, double s) { return ooc::aggregate_gradient(sc.costs, s); },
        "scenario"_a, "s"_a);
    m.def(
        "select_gains",
        [](double varpi, double iota_bar, double rho_min, double lambda2, double margin) {
            return gains_dict(ooc::select_gains({varpi, iota_bar}, rho_min, lambda2, margin));
        },
        "varpi"_a, "iota_bar"_a, "rho_min"_a, "lambda2"_a, "margin"_a = 2.0);

    m.def(
        "companion_pair",
        [](std::size_t s_dim, const std::vector<double>& coeffs) {
            const auto im = ooc::companion_pair(s_dim, coeffs);
            return py::make_tuple(im.M, im.N);
        },
        "s_dim"_a, "char_coeffs"_a);
    m.def(
        "phi_gamma",
        [](const std::vector<double>& freqs) {
            const auto fm = ooc::phi_gamma(freqs);
            return py::make_tuple(fm.Phi, fm.Gamma);
        },
        "frequencies"_a);
    m.def("solve_sylvester", &ooc::solve_sylvester, "M"_a, "N"_a, "Phi"_a, "Gamma"_a,
          "T with T Phi - M T = N Gamma.");
    m.def(
        "psi_true", [](const Eigen::MatrixXd& T, const Eigen::RowVectorXd& Gamma) { return ooc::psi_true(T, Gamma); },
        "T"_a, "Gamma"_a);

    m.def("run", &ooc::run, "scenario"_a, py::call_guard<py::gil_scoped_release>());
    m.def(
        "coordinator_run",
        [](const ooc::Scenario& sc, std::optional<Eigen::VectorXd> y0) {
            const auto gains = ooc::resolve_gains(sc);
            if (!y0) {
                const ooc::System sys(sc);
                y0 = sys.layout().coordinator(sys.initial_state().values).y_r;
            }
            ooc::CoordinatorTrajectory traj;
            {
                py::gil_scoped_release release;
                traj = ooc::coordinator_only_run(sc.graph, sc.costs, gains, *y0, sc.horizon, sc.step,
                                                 sc.record_every, sc.courant);
            }
            const auto n = sc.agents();
            const auto rows = traj.samples.size();
            const auto& S = traj.samples;
            return py::dict(
                "times"_a = traj.times,
                "y_r"_a = column_stack(rows, n, [&](auto r, auto c) { return S[r].y_r(static_cast<Eigen::Index>(c)); }),
                "z"_a = column_stack(rows, n, [&](auto r, auto c) { return S[r].z(static_cast<Eigen::Index>(c)); }),
                "xi_diag"_a = column_stack(rows, n,
                                           [&](auto r, auto c) {
                                               const auto i = static_cast<Eigen::Index>(c);
                                               return S[r].xi(i, i);
                                           }),
                "xi_final"_a = traj.final_state().xi);
        },
        "scenario"_a, "y0"_a = py::none(),
        "Integrates the coordinator alone; y0 defaults to the scenario's seeded references.");

    m.def(
        "verify_json",
        [](const ooc::Scenario& sc, const ooc::Trajectory& traj) {
            ooc::VerificationReport r;
            {
                py::gil_scoped_release release;
                r = ooc::verify(sc, traj);
            }
            return ooc::report_json(r).dump();
        },
        "scenario"_a, "trajectory"_a);
    m.def(
        "metrics_json",
        [](const ooc::Trajectory& traj) { return ooc::metrics_json(ooc::metrics(traj, traj.s_star), traj.s_star).dump(); },
        "trajectory"_a);
}
