// Python bindings for the core operations.

#include "srinit/data.hpp"
#include "srinit/error.hpp"
#include "srinit/experiment.hpp"
#include "srinit/fitting.hpp"
#include "srinit/kernels.hpp"
#include "srinit/network.hpp"
#include "srinit/transform.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace srinit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

py::tuple dataset_tuple(const LabeledDataset& d) { return py::make_tuple(d.inputs(), d.targets()); }

SamplerSettings sampler_settings(const std::string& method, double a_max, int grid, double envelope_safety) {
    SamplerSettings s;
    s.kind = parse_sampler(method);
    s.a_max = a_max;
    s.grid_per_axis = grid;
    s.envelope_safety = envelope_safety;
    return s;
}

py::dict run(const std::string& experiment, const std::string& method, std::uint64_t seed,
             std::optional<int> units, std::optional<std::int64_t> iterations, std::optional<std::string> sampler,
             const std::string& out_dir, const std::string& data_dir, std::optional<Eigen::Index> train_size,
             std::optional<Eigen::Index> test_size) {
    ExperimentConfig cfg = default_config(parse_experiment(experiment), parse_method(method));
    cfg.seed = seed;
    cfg.digits.subset_seed = seed;
    cfg.digits.code_seed = seed;
    if (units) cfg.units = *units;
    if (iterations) cfg.iterations = *iterations;
    if (sampler) {
        if (cfg.method == Method::Bp) throw Error(ErrorCode::InvalidConfig, "bp does not use a sampler");
        cfg.sampler.kind = parse_sampler(*sampler);
    }
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (train_size) cfg.digits.train_size = *train_size;
    if (test_size) cfg.digits.test_size = *test_size;
    cfg.omit_timing_in_trace = true;

    const RunResult r = run_experiment(cfg, out_dir);
    py::list trace;
    for (const auto& p : r.trace) {
        py::dict row;
        row["iter"] = p.iter;
        row["loss"] = p.loss;
        row["train_error"] = p.train_error;
        row["test_error"] = p.test_error;
        trace.append(row);
    }
    py::dict out;
    out["summary"] = summary_line(cfg, r);
    out["trace"] = trace;
    out["status"] = std::string(to_string(r.status));
    out["proposals"] = r.proposals;
    out["sampling_seconds"] = r.timing.sampling;
    out["regression_seconds"] = r.timing.regression;
    out["training_seconds"] = r.timing.training;
    return out;
}

}  // namespace

PYBIND11_MODULE(srinit, m) {
    m.doc() = "Sampling-regression initialization for single-hidden-layer sigmoid networks";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    m.def("mollifier", py::vectorize(&mollifier_eval), py::arg("z"));
    m.def(
        "kernel",
        [](int order, const VectorXd& z, int max_order) {
            const MollifierKernel k = build_kernel(order, max_order);
            return VectorXd(z.unaryExpr([&k](double v) { return k(v); }));
        },
        py::arg("order"), py::arg("z"), py::arg("max_order") = kDefaultMaxOrder,
        "Order-k derivative of the mollifier at each z.");
    m.def(
        "kernel_coefficients",
        [](int order, int max_order) { return build_kernel(order, max_order).coeffs(); },
        py::arg("order"), py::arg("max_order") = kDefaultMaxOrder);
    m.def("kernel_order_for_dim", &kernel_order_for_dim, py::arg("m"));
    m.def(
        "sigmoid_pair",
        [](double h, const VectorXd& z) {
            const SigmoidPair p(h);
            return VectorXd(z.unaryExpr([&p](double v) { return p(v); }));
        },
        py::arg("h"), py::arg("z"));

    m.def("gen_tsc", [](int n) { return dataset_tuple(gen_tsc(n)); }, py::arg("n_points") = 201);
    m.def("gen_sine", [](int n) { return dataset_tuple(gen_sine(n)); }, py::arg("n_points") = 201);
    m.def("gen_boolean", [] { return dataset_tuple(gen_boolean()); });

    m.def(
        "transform",
        [](const MatrixXd& x, const MatrixXd& y, const MatrixXd& a, const VectorXd& b) {
            const EmpiricalTransform t = EmpiricalTransform::for_dataset(LabeledDataset(x, y));
            if (a.rows() != b.size() || a.cols() != x.cols()) {
                throw Error(ErrorCode::ShapeMismatch, "a must be K x m and b of length K");
            }
            VectorXd out(b.size());
            for (Eigen::Index i = 0; i < b.size(); ++i) out[i] = t(a.row(i).transpose(), b[i]);
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("a"), py::arg("b"),
        "Empirical transform T(a_i, b_i) of the dataset (x, y) at each row of a.");
    m.def("support_contains", &support_contains, py::arg("radius"), py::arg("a"), py::arg("b"));

    m.def(
        "sample_hidden",
        [](const MatrixXd& x, const MatrixXd& y, int units, std::uint64_t seed, const std::string& method,
           double a_max, int grid, double envelope_safety) {
            const SampleBatch batch = sample_hidden(LabeledDataset(x, y),
                                                    sampler_settings(method, a_max, grid, envelope_safety),
                                                    units, seed);
            MatrixXd a(batch.samples.size(), x.cols());
            VectorXd b(batch.samples.size());
            for (std::size_t i = 0; i < batch.samples.size(); ++i) {
                a.row(static_cast<Eigen::Index>(i)) = batch.samples[i].a.transpose();
                b[static_cast<Eigen::Index>(i)] = batch.samples[i].b;
            }
            return py::make_tuple(a, b, batch.proposals);
        },
        py::arg("x"), py::arg("y"), py::arg("units"), py::arg("seed"), py::arg("method") = "ar-transformed",
        py::arg("a_max") = 40.0, py::arg("grid") = 400, py::arg("envelope_safety") = 1.5,
        "Draws hidden parameters; returns (a, b, proposals).");

    py::class_<SigmoidUnitNetwork>(m, "SigmoidUnitNetwork")
        .def_readwrite("u", &SigmoidUnitNetwork::u)
        .def_readwrite("c", &SigmoidUnitNetwork::c)
        .def_readwrite("v", &SigmoidUnitNetwork::v)
        .def_property_readonly("units", &SigmoidUnitNetwork::units)
        .def("forward", [](const SigmoidUnitNetwork& n, const MatrixXd& x) { return forward_batch(n, x); });

    py::class_<SigmoidPairNetwork>(m, "SigmoidPairNetwork")
        .def_readwrite("a", &SigmoidPairNetwork::a)
        .def_readwrite("b", &SigmoidPairNetwork::b)
        .def_readwrite("w", &SigmoidPairNetwork::w)
        .def_property_readonly("h", [](const SigmoidPairNetwork& n) { return n.pair.h(); })
        .def_property_readonly("units", &SigmoidPairNetwork::units)
        .def_property_readonly("activation",
                               [](const SigmoidPairNetwork& n) { return std::string(to_string(n.activation)); })
        .def("forward", [](const SigmoidPairNetwork& n, const MatrixXd& x) { return forward_batch(n, x); })
        .def("expand", &expand_pairs, "Equivalent network of 2J plain sigmoid units.")
        .def("__repr__", [](const SigmoidPairNetwork& n) {
            std::ostringstream os;
            os << "SigmoidPairNetwork(m=" << n.input_dim() << ", J=" << n.units() << ", d_out=" << n.output_dim()
               << ", h=" << n.pair.h() << ", activation=" << to_string(n.activation) << ")";
            return os.str();
        });

    m.def(
        "sr_fit",
        [](const MatrixXd& x, const MatrixXd& y, int units, std::uint64_t seed, const std::string& sampler,
           double h, const std::string& activation, double a_max, int grid, double logit_margin) {
            SrConfig cfg;
            cfg.sampler = sampler_settings(sampler, a_max, grid, 1.5);
            cfg.units = units;
            cfg.h = h;
            cfg.activation = parse_activation(activation);
            cfg.logit_margin = logit_margin;
            cfg.seed = seed;
            return sr_pipeline(LabeledDataset(x, y), cfg).net;
        },
        py::arg("x"), py::arg("y"), py::arg("units"), py::arg("seed"), py::arg("sampler") = "ar-transformed",
        py::arg("h") = 1.0, py::arg("activation") = "linear", py::arg("a_max") = 40.0, py::arg("grid") = 400,
        py::arg("logit_margin") = 0.05, "Sampling followed by least-squares output weights.");

    m.def(
        "regress_output",
        [](const MatrixXd& phi, const MatrixXd& y, double cutoff) {
            RegressionConfig cfg;
            cfg.cutoff = cutoff;
            return regress_output(phi, y, cfg);
        },
        py::arg("phi"), py::arg("y"), py::arg("cutoff") = RegressionConfig{}.cutoff);
    m.def(
        "design_matrix",
        [](const MatrixXd& a, const VectorXd& b, double h, const MatrixXd& x) {
            return design_matrix(a, b, SigmoidPair(h), x);
        },
        py::arg("a"), py::arg("b"), py::arg("h"), py::arg("x"));
    m.def(
        "loss",
        [](const MatrixXd& pred, const MatrixXd& target, const std::string& kind) {
            return loss(pred, target, parse_loss(kind));
        },
        py::arg("pred"), py::arg("target"), py::arg("kind") = "rmse");

    m.def("run_experiment", &run, py::arg("experiment"), py::arg("method"), py::arg("seed"),
          py::arg("units") = py::none(), py::arg("iterations") = py::none(), py::arg("sampler") = py::none(),
          py::arg("out_dir") = "", py::arg("data_dir") = "", py::arg("train_size") = py::none(),
          py::arg("test_size") = py::none(),
          "Runs one experiment; writes a result bundle when out_dir is given.");
}
