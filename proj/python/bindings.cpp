#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpinn/checkpoint.hpp"
#include "cpinn/errors.hpp"
#include "cpinn/trainer.hpp"

namespace py = pybind11;
using namespace cpinn;

namespace {

ProblemId problem_from(const std::string& name) {
    const auto id = parse_problem_id(name);
    if (!id) throw ConfigError("unknown problem '" + name + "'");
    return *id;
}

Variant variant_from(const std::string& name) {
    const auto v = parse_variant(name);
    if (!v) throw ConfigError("unknown model '" + name + "'");
    return *v;
}

ProblemSpec spec_from(const std::string& name, std::optional<double> eps, std::optional<double> mu) {
    return make_problem(problem_from(name), eps, mu);
}

py::dict train_py(const std::string& problem, const std::string& model, std::optional<long> epochs,
                  std::optional<double> lr, std::uint64_t seed, std::optional<int> points,
                  std::optional<int> boundary_points, std::optional<long> log_every, std::optional<double> epsilon,
                  std::optional<double> mu, std::optional<int> hidden_layers, std::optional<int> outer_width,
                  std::optional<int> inner_width) {
    TrainingConfig c = default_config(problem_from(problem), variant_from(model));
    c.epsilon = epsilon;
    c.mu = mu;
    c.seed = seed;
    if (epochs) c.epochs = *epochs;
    if (lr) c.lr = *lr;
    if (points) c.n_collocation = *points;
    if (boundary_points) c.n_boundary_per_face = *boundary_points;
    if (log_every) c.log_every = *log_every;
    c.log_every = std::min(c.log_every, c.epochs);
    if (hidden_layers) c.arch.hidden_layers = *hidden_layers;
    if (outer_width) c.arch.outer_width = *outer_width;
    if (inner_width) c.arch.inner_width = *inner_width;

    TrainingResult r;
    {
        py::gil_scoped_release release;
        r = train(c);
    }
    py::list records;
    for (const auto& rec : r.records) {
        py::dict d;
        d["epoch"] = rec.epoch;
        d["total"] = rec.total;
        d["residual"] = rec.residual_term;
        d["boundary"] = rec.boundary_term;
        d["lr"] = rec.lr_used;
        records.append(d);
    }
    py::dict out;
    out["records"] = records;
    out["final_loss"] = r.metrics.final_loss;
    out["l2_rel_error"] = r.metrics.l2_rel_error;
    out["max_abs_error"] = r.metrics.max_abs_error;
    out["wall_time_seconds"] = r.metrics.wall_time_seconds;
    out["checkpoint"] = py::bytes(serialize_model(r.model));
    return out;
}

} // namespace

PYBIND11_MODULE(_cpinn, m) {
    m.doc() = "Composite physics-informed networks for singularly perturbed boundary-value problems";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("problems", [] {
        std::vector<std::string> names;
        for (ProblemId id : kAllProblems) names.emplace_back(problem_name(id));
        return names;
    });
    m.def("safe_exp", &safe_exp, py::arg("z"));
    m.def(
        "analytic_solution",
        [](const std::string& p, const std::vector<double>& x, std::optional<double> eps, std::optional<double> mu) {
            return analytic_solution(spec_from(p, eps, mu), x);
        },
        py::arg("problem"), py::arg("x"), py::arg("epsilon") = py::none(), py::arg("mu") = py::none());
    m.def(
        "manufactured_source",
        [](const std::string& p, const std::vector<double>& x, std::optional<double> eps, std::optional<double> mu) {
            return manufactured_source(spec_from(p, eps, mu), x);
        },
        py::arg("problem"), py::arg("x"), py::arg("epsilon") = py::none(), py::arg("mu") = py::none());

    m.def(
        "uniform_collocation_1d", [](int n) { return Eigen::MatrixXd(uniform_collocation_1d(n).points.transpose()); },
        py::arg("n"));
    m.def(
        "lhs_2d", [](int n, std::uint64_t seed) { return Eigen::MatrixXd(lhs_2d(n, seed).points.transpose()); },
        py::arg("n"), py::arg("seed"));
    m.def(
        "boundary_points",
        [](int dim, int n) { return Eigen::MatrixXd(boundary_points(dim, n).points.transpose()); }, py::arg("dim"),
        py::arg("n_per_face"));

    m.def("train", &train_py, py::arg("problem"), py::arg("model") = "cpinn", py::arg("epochs") = py::none(),
          py::arg("lr") = py::none(), py::arg("seed") = 0, py::arg("points") = py::none(),
          py::arg("boundary_points") = py::none(), py::arg("log_every") = py::none(),
          py::arg("epsilon") = py::none(), py::arg("mu") = py::none(), py::arg("hidden_layers") = py::none(),
          py::arg("outer_width") = py::none(), py::arg("inner_width") = py::none(),
          "Trains one model and returns its loss records, metrics and checkpoint bytes.");

    py::class_<CompositeModel>(m, "Model")
        .def_static(
            "from_bytes", [](const py::bytes& b) { return deserialize_model(std::string(b)); }, py::arg("data"))
        .def_static(
            "load", [](const std::string& path) { return load_checkpoint(path); }, py::arg("path"))
        .def("to_bytes", [](const CompositeModel& model) { return py::bytes(serialize_model(model)); })
        .def_property_readonly("input_dim", &CompositeModel::input_dim)
        .def_property_readonly("n_components", &CompositeModel::n_components)
        .def_property_readonly("n_inner", [](const CompositeModel& model) { return model.inner().size(); })
        .def_property_readonly("parameter_count", &CompositeModel::parameter_count)
        .def(
            "__call__", [](const CompositeModel& model, const std::vector<double>& x) {
                return composite_forward(model, x);
            },
            py::arg("x"))
        .def(
            "jet",
            [](const CompositeModel& model, const std::vector<double>& x, int component) {
                const Jet2 j = eval_jet(model, x, component);
                return py::make_tuple(j.value, j.grad, j.hess_diag);
            },
            py::arg("x"), py::arg("component") = 0, "(value, gradient, diagonal Hessian) at x");
}
