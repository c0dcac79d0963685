#include "pathwise/config.hpp"
#include "pathwise/errors.hpp"
#include "pathwise/experiments.hpp"
#include "pathwise/families.hpp"
#include "pathwise/paths.hpp"
#include "pathwise/refsolver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pathwise;

namespace {

py::array_t<double> matrix(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const std::vector<double>& data) {
    py::array_t<double> out(static_cast<py::ssize_t>(data.size()));
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::dict samples_dict(const FDSolution& s) {
    py::dict d;
    d["times"] = to_numpy(s.samples.times);
    d["x"] = to_numpy(s.samples.xs);
    d["values"] = matrix(s.samples.values, s.samples.times.size(), s.samples.xs.size());
    d["cfl"] = s.cfl;
    return d;
}

FDGrid make_grid(double x_lo, double x_hi, std::size_t nx, const std::string& boundary) {
    FDGrid g;
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.nx = nx;
    if (boundary == "clamp") g.boundary = Boundary::clamp;
    else if (boundary != "dirichlet") throw ParameterError("boundary must be 'dirichlet' or 'clamp'");
    return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pathwise rough-path and SPDE toolkit";
    m.attr("__version__") = library_version();

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<InternalError>(m, "InternalError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<SamplePath>(m, "SamplePath")
        .def_static(
            "from_values",
            [](py::array_t<double, py::array::c_style | py::array::forcecast> values, double horizon) {
                if (values.ndim() != 2) throw ParameterError("values must be a (N + 1, d) array");
                const auto d = static_cast<std::size_t>(values.shape(1));
                return SamplePath::from_values(d, horizon, {values.data(), values.data() + values.size()});
            },
            py::arg("values"), py::arg("horizon"))
        .def_property_readonly("dimension", &SamplePath::dimension)
        .def_property_readonly("horizon", &SamplePath::horizon)
        .def_property_readonly("steps", &SamplePath::steps)
        .def_property_readonly("step", &SamplePath::step)
        .def_property_readonly("seed", &SamplePath::seed)
        .def_property_readonly("times",
                               [](const SamplePath& p) {
                                   std::vector<double> t(p.steps() + 1);
                                   for (std::size_t k = 0; k <= p.steps(); ++k) t[k] = p.time(k);
                                   return to_numpy(t);
                               })
        .def_property_readonly("values", [](const SamplePath& p) {
            return matrix({p.values().begin(), p.values().end()}, p.steps() + 1, p.dimension());
        });

    m.def("sample_path", &sample_path, py::arg("dimension"), py::arg("horizon"), py::arg("steps"), py::arg("seed"));
    m.def("refine", &refine, py::arg("path"), py::arg("factor"), py::arg("bridge_noise") = true);
    m.def(
        "second_level",
        [](const SamplePath& p, double s, double t) {
            const SecondLevel l = second_level(p, s, t);
            py::dict d;
            d["increment"] = Eigen::VectorXd(l.increment);
            d["strat"] = Eigen::MatrixXd(l.strat);
            d["levy"] = Eigen::MatrixXd(l.levy);
            return d;
        },
        py::arg("path"), py::arg("s"), py::arg("t"));
    m.def("chen_check", &chen_check, py::arg("path"), py::arg("s"), py::arg("u"), py::arg("t"));
    m.def("holder_coefficient", &holder_coefficient, py::arg("path"), py::arg("kappa"));

    m.def("f_families", &f_families);
    m.def("g_families", &g_families);
    m.def("initial_families", &initial_families);

    m.def(
        "solve_fd",
        [](const std::string& f, const Params& f_params, const std::string& g, const Params& g_params,
           const std::string& initial, const Params& initial_params, const SamplePath& path, double x_lo, double x_hi,
           std::size_t nx, const std::string& scheme, const std::string& boundary) {
            const CoefficientSuite suite = make_suite(f, f_params, g, g_params, 1, 1);
            const InitialData u0 = make_initial(initial, initial_params);
            const FDGrid grid = make_grid(x_lo, x_hi, nx, boundary);
            py::gil_scoped_release release;
            FDSolution s;
            if (scheme == "stratonovich") s = solve_fd_stratonovich(suite, u0, grid, path);
            else if (scheme == "ito") s = solve_fd_ito(suite, u0, grid, path);
            else throw ParameterError("scheme must be 'stratonovich' or 'ito'");
            py::gil_scoped_acquire acquire;
            return samples_dict(s);
        },
        py::arg("f"), py::arg("f_params"), py::arg("g"), py::arg("g_params"), py::arg("initial"),
        py::arg("initial_params"), py::arg("path"), py::arg("x_lo") = -8.0, py::arg("x_hi") = 8.0,
        py::arg("nx") = 401, py::arg("scheme") = "stratonovich", py::arg("boundary") = "dirichlet",
        "Finite-difference solution of du = f dt + g o dB (Stratonovich) or its Ito form on a frozen path.");

    m.def("experiment_names", &experiment_names);
    m.def("validate_config", [](const std::string& text) { return echo_config(parse_config(text)); },
          py::arg("text"), "Parses a YAML experiment config and returns its normalized echo.");
    m.def(
        "run_experiment",
        [](const std::string& config_file, const std::string& output_dir, unsigned threads) {
            const ExperimentConfig cfg = load_config(config_file);
            RunOptions opt;
            opt.output_dir = output_dir;
            opt.threads = threads;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg, opt);
            }
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["message"] = r.message;
            d["artifacts"] = r.artifacts;
            return d;
        },
        py::arg("config_file"), py::arg("output_dir"), py::arg("threads") = 1);
}
