#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mlkol/config.hpp"
#include "mlkol/estimators.hpp"
#include "mlkol/harness.hpp"
#include "mlkol/io.hpp"
#include "mlkol/oracle_checks.hpp"
#include "mlkol/schedules.hpp"
#include "mlkol/spectral.hpp"
#include "mlkol/synth.hpp"

namespace py = pybind11;
using namespace mlkol;

namespace {

OperatorMatrix make_operator(const Eigen::MatrixXd& m, const ProblemConfig& cfg) {
    return OperatorMatrix(m, EigenDecay(static_cast<int>(m.cols()), cfg.p),
                          EigenDecay(static_cast<int>(m.rows()), cfg.q));
}

}  // namespace

PYBIND11_MODULE(_mlkol, m) {
    m.doc() = "Spectral simulator for multilevel kernel operator learning";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<ProblemConfig>(m, "ProblemConfig")
        .def(py::init<>())
        .def_readwrite("p", &ProblemConfig::p)
        .def_readwrite("q", &ProblemConfig::q)
        .def_readwrite("alpha", &ProblemConfig::alpha)
        .def_readwrite("beta", &ProblemConfig::beta)
        .def_readwrite("beta_prime", &ProblemConfig::beta_prime)
        .def_readwrite("gamma", &ProblemConfig::gamma)
        .def_readwrite("gamma_prime", &ProblemConfig::gamma_prime)
        .def_readwrite("B", &ProblemConfig::B)
        .def_readwrite("sigma", &ProblemConfig::sigma)
        .def_readwrite("c0", &ProblemConfig::c0)
        .def_readwrite("d_in", &ProblemConfig::d_in)
        .def_readwrite("d_out", &ProblemConfig::d_out)
        .def_readwrite("seed", &ProblemConfig::seed)
        .def("validate", &ProblemConfig::validate);

    py::class_<TheoreticalRate>(m, "TheoreticalRate")
        .def_readonly("eta1", &TheoreticalRate::eta1)
        .def_readonly("eta2", &TheoreticalRate::eta2)
        .def_readonly("u", &TheoreticalRate::u);
    m.def("theoretical_rate", &theoretical_rate);

    m.def("decay_values", [](int dim, double exponent) { return make_decay(dim, exponent).values(); },
          py::arg("dim"), py::arg("exponent"));

    m.def("operator_from_source",
          [](const Eigen::MatrixXd& a, const ProblemConfig& cfg) {
              SourceCoefficients src{a, cfg.beta, cfg.gamma};
              return operator_from_source(src, EigenDecay(static_cast<int>(a.cols()), cfg.p),
                                          EigenDecay(static_cast<int>(a.rows()), cfg.q))
                  .m;
          },
          py::arg("a"), py::arg("cfg"), "Orthonormal coordinates of the source coefficients a.");

    m.def("bg_norm",
          [](const Eigen::MatrixXd& op, const ProblemConfig& cfg, double b, double g) {
              return bg_norm(make_operator(op, cfg), b, g);
          },
          py::arg("op"), py::arg("cfg"), py::arg("b"), py::arg("g"));

    py::class_<Level>(m, "Level")
        .def_readonly("x", &Level::x)
        .def_readonly("y", &Level::y)
        .def_readonly("lambda_", &Level::lambda)
        .def_readonly("row_begin", &Level::row_begin)
        .def_readonly("row_end", &Level::row_end);
    py::class_<LevelSchedule>(m, "LevelSchedule")
        .def_readonly("levels", &LevelSchedule::levels)
        .def_readonly("eta1", &LevelSchedule::eta1)
        .def_readonly("eta2", &LevelSchedule::eta2)
        .def_readonly("u", &LevelSchedule::u)
        .def_readonly("special_case", &LevelSchedule::special_case)
        .def_readonly("clamped", &LevelSchedule::clamped)
        .def_readonly("lambda_floor", &LevelSchedule::lambda_floor)
        .def("__len__", &LevelSchedule::level_count);
    m.def("multilevel_schedule", &multilevel_schedule, py::arg("cfg"), py::arg("n"));

    py::class_<LambdaSchedule>(m, "LambdaSchedule")
        .def_readonly("y_max", &LambdaSchedule::y_max)
        .def_readonly("lambdas", &LambdaSchedule::lambdas)
        .def_readonly("clamped", &LambdaSchedule::clamped);
    m.def("variance_lambdas", &variance_lambdas, py::arg("cfg"), py::arg("n"));
    m.def("bias_lambdas", &bias_lambdas, py::arg("cfg"), py::arg("n"));

    m.def("make_dataset",
          [](const Eigen::MatrixXd& op, const ProblemConfig& cfg, int n, std::uint64_t seed) {
              const auto data =
                  make_dataset(make_operator(op, cfg), n, NoiseProfile{NoiseKind::polynomial, cfg.sigma}, seed);
              return py::make_tuple(data.u, data.v);
          },
          py::arg("op"), py::arg("cfg"), py::arg("n"), py::arg("seed"),
          "Returns (u, v) with v = u op^T + noise.");

    m.def("random_source_operator",
          [](const ProblemConfig& cfg, std::uint64_t seed, double taper) {
              const auto truth = random_source_operator(cfg, seed, taper);
              return py::make_tuple(truth.source.a, truth.op.m);
          },
          py::arg("cfg"), py::arg("seed"), py::arg("taper") = 0.75);

    m.def("estimate",
          [](const std::string& kind, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
             const ProblemConfig& cfg) {
              SampleSet data{u, v, 0};
              return estimate(estimator_from_string(kind), data, cfg).m;
          },
          py::arg("kind"), py::arg("u"), py::arg("v"), py::arg("cfg"),
          "kind is one of single, variance, bias, multilevel.");

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("cases", &CheckResult::cases)
        .def_readonly("worst", &CheckResult::worst)
        .def_readonly("tolerance", &CheckResult::tolerance)
        .def_readonly("elapsed_ms", &CheckResult::elapsed_ms);
    m.def("run_oracle_checks", &run_oracle_checks, py::arg("seed") = 20240601);

    m.def("fit_rate", &fit_rate, py::arg("points"));
    py::class_<RateFit>(m, "RateFit")
        .def_readonly("slope", &RateFit::slope)
        .def_readonly("intercept", &RateFit::intercept)
        .def_readonly("r_squared", &RateFit::r_squared);

    m.def("load_config",
          [](const std::filesystem::path& path) { return load_config(path).problem; },
          py::arg("path"));

    m.def("run_rates",
          [](const std::filesystem::path& config, const std::vector<int>& n_list, int trials,
             int workers) {
              ExperimentPlan plan;
              plan.config = load_config(config);
              plan.n_list = n_list;
              plan.trials = trials;
              plan.workers = workers;
              plan.validate();
              RateReport report;
              {
                  py::gil_scoped_release release;
                  report = run_convergence(plan);
              }
              py::dict out;
              for (const auto& row : report.summary) {
                  out[py::make_tuple(to_string(row.estimator), row.n)] = row.median_error_sq;
              }
              py::dict slopes;
              for (const auto& f : report.fits) slopes[py::str(to_string(f.estimator))] = f.fit.slope;
              return py::make_tuple(out, slopes);
          },
          py::arg("config"), py::arg("n_list"), py::arg("trials") = 3, py::arg("workers") = 1,
          "Returns ({(estimator, n): median_error_sq}, {estimator: slope}).");
}
