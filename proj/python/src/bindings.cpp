#include "lahda/banded.hpp"
#include "lahda/config.hpp"
#include "lahda/fd.hpp"
#include "lahda/letkf.hpp"
#include "lahda/mesh_ops.hpp"
#include "lahda/metric.hpp"
#include "lahda/nagumo.hpp"
#include "lahda/observations.hpp"
#include "lahda/twin.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace lahda;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a)
{
    if (a.ndim() != 1) {
        throw std::invalid_argument("expected a one-dimensional array");
    }
    return {a.data(), a.data() + a.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd scalar_values(const MetricField& m)
{
    if (m.dim() != 1) {
        throw std::invalid_argument("only scalar metrics cross the Python boundary");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = m[i](0, 0);
    }
    return out;
}

EnsembleState to_ensemble(const py::array_t<double, py::array::c_style | py::array::forcecast>& members,
                          const Mesh1D& mesh)
{
    if (members.ndim() != 3 || members.shape(2) != static_cast<py::ssize_t>(mesh.size())) {
        throw std::invalid_argument("members must have shape (ne, components, nodes)");
    }
    const auto r = members.unchecked<3>();
    std::vector<StateField> out;
    for (py::ssize_t i = 0; i < r.shape(0); ++i) {
        std::vector<Eigen::VectorXd> comps;
        for (py::ssize_t c = 0; c < r.shape(1); ++c) {
            Eigen::VectorXd v(r.shape(2));
            for (py::ssize_t j = 0; j < r.shape(2); ++j) {
                v[j] = r(i, c, j);
            }
            comps.push_back(std::move(v));
        }
        out.emplace_back(mesh, std::move(comps));
    }
    return EnsembleState(std::move(out));
}

py::array_t<double> from_ensemble(const EnsembleState& e)
{
    const auto n = static_cast<py::ssize_t>(e.mesh().size());
    py::array_t<double> out({static_cast<py::ssize_t>(e.size()), static_cast<py::ssize_t>(e.components()), n});
    auto w = out.mutable_unchecked<3>();
    for (int i = 0; i < e.size(); ++i) {
        for (int c = 0; c < e.components(); ++c) {
            for (py::ssize_t j = 0; j < n; ++j) {
                w(i, c, j) = e[i].component(c)[j];
            }
        }
    }
    return out;
}

ObsOperator make_operator(const std::string& kind, double delta, double r_obs)
{
    ObsOperator op;
    if (kind == "pointwise") {
        op.kind = ObsKind::pointwise;
    } else if (kind == "nonlocal") {
        op.kind = ObsKind::nonlocal;
    } else {
        throw std::invalid_argument("kind must be 'pointwise' or 'nonlocal'");
    }
    op.kernel = GaussKernel{delta, 1};
    op.r_obs = r_obs;
    return op;
}

CycleConfig config_from_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace

PYBIND11_MODULE(_lahda, m)
{
    m.doc() = "Adaptive-mesh ensemble data assimilation";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def(
        "spd_intersect",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) -> Eigen::MatrixXd {
            return spd_intersect(SpdMatrix(a), SpdMatrix(b)).matrix();
        },
        py::arg("a"), py::arg("b"), "Metric intersection of two SPD matrices of size 1, 2 or 3.");

    m.def(
        "fd_apply",
        [](const Array& u, const Array& x, int order) {
            return fd_apply(to_vector(u), Mesh1D(to_vector(x)), order);
        },
        py::arg("u"), py::arg("x"), py::arg("order"), "Nonuniform finite-difference derivative of order 1, 2 or 4.");

    m.def(
        "hessian_metric",
        [](const Array& u, const Array& x, double alpha_h) {
            return scalar_values(hessian_metric(to_vector(u), Mesh1D(to_vector(x)), alpha_h));
        },
        py::arg("u"), py::arg("x"), py::arg("alpha_h") = 1.0, "Nodal Hessian metric of a scalar field.");

    m.def(
        "equidistribute",
        [](const Array& x, const Array& metric, int intervals) {
            const Mesh1D mesh(to_vector(x));
            const Mesh1D out = equidistribute(MetricField::scalar(mesh, to_vector(metric)), intervals);
            return to_eigen({out.nodes().begin(), out.nodes().end()});
        },
        py::arg("x"), py::arg("metric"), py::arg("intervals"),
        "Nodes of the mesh equidistributing a nodal scalar metric.");

    m.def(
        "interp_linear",
        [](const Array& x, const Array& values, const Array& target) {
            return interp_linear(Mesh1D(to_vector(x)), to_vector(values), Mesh1D(to_vector(target)));
        },
        py::arg("x"), py::arg("values"), py::arg("target"));

    m.def(
        "observe",
        [](const Array& u, const Array& x, const Array& locations, const std::string& kind, double delta,
           double r_obs) {
            const Mesh1D mesh(to_vector(x));
            const auto field = to_vector(u);
            const auto locs = to_vector(locations);
            if (kind == "pointwise") {
                return obs_pointwise(field, mesh, locs);
            }
            const ObsOperator op = make_operator(kind, delta, r_obs);
            return obs_nonlocal(field, mesh, locs, op.kernel, op.r_obs);
        },
        py::arg("u"), py::arg("x"), py::arg("locations"), py::arg("kind") = "pointwise", py::arg("delta") = 1e-3,
        py::arg("r_obs") = 2e-2, "Pointwise or kernel-averaged observations of a nodal field.");

    m.def("etkf_weights",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&>(&etkf_weights),
          py::arg("Y"), py::arg("r_diag"), py::arg("innovation"));

    m.def(
        "localization_radii",
        [](const Array& x, const Array& metric, double r0) {
            return localization_radii(MetricField::scalar(Mesh1D(to_vector(x)), to_vector(metric)), r0);
        },
        py::arg("x"), py::arg("metric"), py::arg("r0"));

    m.def(
        "local_analysis",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& members, const Array& x,
           const std::vector<std::vector<double>>& locations, const Eigen::VectorXd& values,
           const Eigen::VectorXd& r_diag, const Eigen::VectorXd& radii, double rho, bool coupled,
           const std::string& kind, double delta, double r_obs) {
            const Mesh1D mesh(to_vector(x));
            ObservationSet obs;
            obs.op = make_operator(kind, delta, r_obs);
            obs.locations = locations;
            obs.values = values;
            obs.r_diag = r_diag;
            AnalysisConfig cfg;
            cfg.rho = rho;
            cfg.coupling = coupled ? Coupling::coupled : Coupling::uncoupled;
            return from_ensemble(local_analysis(to_ensemble(members, mesh), obs, radii, cfg));
        },
        py::arg("members"), py::arg("x"), py::arg("locations"), py::arg("values"), py::arg("r_diag"),
        py::arg("radii"), py::arg("rho") = 1.1, py::arg("coupled") = true, py::arg("kind") = "pointwise",
        py::arg("delta") = 1e-3, py::arg("r_obs") = 2e-2,
        "LETKF analysis of an ensemble of shape (ne, components, nodes).");

    m.def(
        "nagumo_exact",
        [](const Array& x, double t) {
            const NagumoParams p;
            Eigen::VectorXd out(x.size());
            for (py::ssize_t i = 0; i < x.size(); ++i) {
                out[i] = nagumo_exact(x.data()[i], t, p);
            }
            return out;
        },
        py::arg("x"), py::arg("t"), "Traveling-wave solution of the default Nagumo problem.");

    m.def(
        "normalize_config", [](const std::string& text) { return write_config(config_from_text(text)); },
        py::arg("text"), "Parses a configuration and writes every field back out.");

    m.def(
        "run_twin",
        [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<int> cycles) {
            CycleConfig cfg = config_from_text(text);
            if (seed) {
                cfg.seed = *seed;
            }
            if (cycles) {
                cfg.cycles = *cycles;
                cfg.spinup_cycles = std::min(cfg.spinup_cycles, *cycles - 1);
            }
            TwinResult result;
            {
                py::gil_scoped_release release;
                result = run_twin(cfg);
            }
            const auto n = static_cast<Eigen::Index>(result.records.size());
            const auto nc = static_cast<Eigen::Index>(result.mean_rmse.size());
            Eigen::VectorXd times(n);
            Eigen::MatrixXd rmse(n, nc);
            for (Eigen::Index i = 0; i < n; ++i) {
                times[i] = result.records[i].time;
                for (Eigen::Index c = 0; c < nc; ++c) {
                    rmse(i, c) = result.records[i].rmse[c];
                }
            }
            py::dict out;
            out["time"] = times;
            out["rmse"] = rmse;
            out["mean_rmse"] = result.mean_rmse;
            return out;
        },
        py::arg("config_text"), py::arg("seed") = py::none(), py::arg("cycles") = py::none(),
        "Runs a twin experiment from configuration text.");
}
