// Python bindings for the closed forms, the moment propagator and the Fock
// oracle.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hyperbat/analytic.hpp"
#include "hyperbat/commands.hpp"
#include "hyperbat/errors.hpp"
#include "hyperbat/fock.hpp"
#include "hyperbat/harness.hpp"
#include "hyperbat/moments.hpp"
#include "hyperbat/params.hpp"

namespace py = pybind11;
using namespace hyperbat;

namespace {

py::dict table_dict(const Table& t) {
    py::dict d;
    d["columns"] = t.columns;
    d["units"] = t.units;
    d["rows"] = t.rows;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "pulsed quadratic quantum battery";

    static py::exception<Error> error(m, "HyperbatError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::enum_<Regime>(m, "Regime")
        .value("Underdamped", Regime::Underdamped)
        .value("ExceptionalPoint", Regime::ExceptionalPoint)
        .value("Overdamped", Regime::Overdamped);
    py::enum_<CouplingLimit>(m, "CouplingLimit")
        .value("WeakCoupling", CouplingLimit::WeakCoupling)
        .value("StrongCoupling", CouplingLimit::StrongCoupling);
    py::enum_<PulseShape>(m, "PulseShape").value("Gaussian", PulseShape::Gaussian).value("Rectangular", PulseShape::Rectangular);

    py::class_<BatteryParams>(m, "BatteryParams")
        .def(py::init([](double omega_b, double g, double gamma, double Omega) {
                 return BatteryParams{omega_b, g, gamma, Omega};
             }),
             py::arg("omega_b") = 1.0, py::arg("g") = 2.0, py::arg("gamma") = 1.0, py::arg("Omega") = 1.0)
        .def_readwrite("omega_b", &BatteryParams::omega_b)
        .def_readwrite("g", &BatteryParams::g)
        .def_readwrite("gamma", &BatteryParams::gamma)
        .def_readwrite("Omega", &BatteryParams::Omega)
        .def("__eq__", [](const BatteryParams& a, const BatteryParams& b) { return a == b; })
        .def("__repr__", [](const BatteryParams& p) {
            return "BatteryParams(omega_b=" + format_number(p.omega_b) + ", g=" + format_number(p.g)
                   + ", gamma=" + format_number(p.gamma) + ", Omega=" + format_number(p.Omega) + ")";
        });

    py::class_<RegimeRates>(m, "RegimeRates")
        .def_readonly("regime", &RegimeRates::regime)
        .def_readonly("rate", &RegimeRates::rate)
        .def_readonly("g_ep", &RegimeRates::g_ep);

    py::class_<PulseSpec>(m, "PulseSpec")
        .def_static("delta", &PulseSpec::delta)
        .def_static("finite", &PulseSpec::finite, py::arg("tau"), py::arg("shape") = PulseShape::Gaussian)
        .def_readonly("tau", &PulseSpec::tau)
        .def("end_time", &PulseSpec::end_time)
        .def("envelope", &PulseSpec::envelope);

    py::class_<EnergyRecord>(m, "EnergyRecord")
        .def_readonly("t", &EnergyRecord::t)
        .def_readonly("E", &EnergyRecord::E)
        .def_readonly("E_beta", &EnergyRecord::E_beta)
        .def_readonly("ergotropy", &EnergyRecord::ergotropy)
        .def_readonly("D", &EnergyRecord::D)
        .def_readonly("P", &EnergyRecord::P);

    py::class_<OptimalPoint>(m, "OptimalPoint")
        .def_readonly("t_E", &OptimalPoint::t_E)
        .def_readonly("E_max", &OptimalPoint::E_max)
        .def_readonly("regime", &OptimalPoint::regime);

    py::class_<SecondMoments>(m, "SecondMoments")
        .def(py::init<>())
        .def_readwrite("n_a", &SecondMoments::n_a)
        .def_readwrite("n_b", &SecondMoments::n_b)
        .def_readwrite("coh_ab", &SecondMoments::coh_ab)
        .def_readwrite("sq_aa", &SecondMoments::sq_aa)
        .def_readwrite("sq_bb", &SecondMoments::sq_bb)
        .def_readwrite("sq_ab", &SecondMoments::sq_ab);

    py::class_<fock::OracleReport>(m, "OracleReport")
        .def_readonly("t", &fock::OracleReport::t)
        .def_readonly("moments", &fock::OracleReport::moments)
        .def_readonly("mean_a", &fock::OracleReport::mean_a)
        .def_readonly("mean_b", &fock::OracleReport::mean_b)
        .def_readonly("energy", &fock::OracleReport::energy)
        .def_readonly("truncation_weight", &fock::OracleReport::truncation_weight)
        .def_readonly("trace", &fock::OracleReport::trace)
        .def_readonly("n_max", &fock::OracleReport::n_max)
        .def("certified", &fock::OracleReport::certified);

    m.def("classify_regime", &classify_regime);
    m.def("enhancement_factor", &enhancement_factor);
    m.def("population_charger", &population_charger, py::arg("params"), py::arg("t"));
    m.def("population_holder", &population_holder, py::arg("params"), py::arg("t"));
    m.def("stored_energy", &stored_energy, py::arg("params"), py::arg("t"));
    m.def("excitation_fraction", &excitation_fraction, py::arg("params"), py::arg("t"));
    m.def("passive_discriminant", &passive_discriminant, py::arg("params"), py::arg("t"));
    m.def("ergotropy", &ergotropy, py::arg("params"), py::arg("t"));
    m.def("optimal_time", &optimal_time);
    m.def("optimal_energy", &optimal_energy);
    m.def("asymptotic_optimal_time", &asymptotic_optimal_time);
    m.def("asymptotic_optimal_energy", &asymptotic_optimal_energy);

    m.def("post_pulse_moments", &post_pulse_moments, py::arg("Omega"));
    m.def("propagate_moments", &propagate_moments, py::arg("initial"), py::arg("params"), py::arg("t_grid"),
          py::call_guard<py::gil_scoped_release>());
    m.def("propagate_through_pulse", &propagate_through_pulse, py::arg("params"), py::arg("pulse"),
          py::arg("rtol") = 1e-10);
    m.def("gaussian_ergotropy_from_moments", &gaussian_ergotropy_from_moments, py::arg("moments"), py::arg("omega_b"),
          py::arg("t") = 0.0, py::arg("C") = 0.0);

    m.def("certified_cutoff", &fock::certified_cutoff, py::arg("Omega"), py::arg("max_cutoff") = 400);
    m.def(
        "run_oracle",
        [](const BatteryParams& p, const std::vector<double>& t_grid, int n_max, double rtol) {
            fock::OracleOptions opts;
            opts.n_max = n_max;
            opts.rtol = rtol;
            return fock::run_oracle(p, t_grid, opts);
        },
        py::arg("params"), py::arg("t_grid"), py::arg("n_max") = 0, py::arg("rtol") = 1e-8,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "trace_table",
        [](const BatteryParams& p, const std::string& grid, bool oracle) {
            RunConfig c;
            c.params = p;
            c.grid = GridSpec::parse(grid);
            c.oracle = oracle;
            return table_dict(trace_table(c));
        },
        py::arg("params"), py::arg("grid") = "0:10:201", py::arg("oracle") = false);
    m.def(
        "sweep_table",
        [](const std::string& quantity, const std::string& grid, double Omega) {
            RunConfig c;
            c.params.Omega = Omega;
            c.mode = quantity == "Emax" ? Mode::SweepEmax : Mode::SweepTE;
            if (quantity != "Emax" && quantity != "tE") throw Error(ErrorKind::ConfigInvalid, "quantity must be tE or Emax");
            c.grid = GridSpec::parse(grid);
            return table_dict(sweep_table(c));
        },
        py::arg("quantity") = "tE", py::arg("grid") = "0.01:100:201:log", py::arg("Omega") = 1.0);
}
