#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "latentacc/errors.hpp"
#include "latentacc/fisher.hpp"
#include "latentacc/montecarlo.hpp"
#include "latentacc/theory.hpp"

namespace py = pybind11;
using namespace latentacc;

namespace {

std::vector<std::vector<double>> rows_of(const SymMatrix& m) {
  std::vector<std::vector<double>> out(m.dim(), std::vector<double>(m.dim()));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out[i][j] = m(i, j);
  return out;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

Dataset make_dataset(std::vector<double> xs, std::optional<std::vector<int>> ys) { return {std::move(xs), std::move(ys)}; }

py::dict series_dict(const ConvergenceSeries& s) {
  py::dict d;
  d["functional"] = to_string(s.functional);
  d["method"] = to_string(s.method);
  d["alpha"] = s.alpha;
  d["n_grid"] = s.n_grid;
  d["estimates"] = s.estimates;
  d["theory_coefficient"] = s.theory_coefficient;
  d["extrapolated_coefficient"] = s.extrapolated_coefficient;
  d["extrapolation_stderr"] = s.extrapolation_stderr;
  d["slope"] = s.slope;
  d["fit_chi2"] = s.fit_chi2;
  d["verdict"] = to_string(s.verdict);
  d["insufficient_precision"] = s.insufficient_precision;
  d["grid_refinement_delta"] = s.grid_refinement_delta;
  d["warnings"] = s.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latent-variable estimation accuracy: Fisher matrices, coefficients and Monte Carlo studies";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<RunFailed>(m, "RunFailed", error.ptr());
  py::register_exception<AlphaGridMismatch>(m, "AlphaGridMismatch", error.ptr());

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("binomial_mixture", &ModelSpec::binomial_mixture, py::arg("trial_count") = 3)
      .def_static("gaussian_mixture_1d", &ModelSpec::gaussian_mixture_1d)
      .def_property_readonly("dim", &ModelSpec::dim)
      .def_property_readonly("name", &ModelSpec::name)
      .def("__repr__", [](const ModelSpec& s) { return "<ModelSpec " + s.name() + ">"; });

  py::class_<ParamVec>(m, "ParamVec")
      .def(py::init<const ModelSpec&, std::vector<double>>(), py::arg("model"), py::arg("values"))
      .def_property_readonly("values",
                             [](const ParamVec& w) { return std::vector<double>(w.values().begin(), w.values().end()); })
      .def("__len__", &ParamVec::size)
      .def("__getitem__", [](const ParamVec& w, std::size_t i) {
        if (i >= w.size()) throw py::index_error();
        return w[i];
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("xs"), py::arg("ys") = std::nullopt)
      .def_readonly("xs", &Dataset::xs)
      .def_readonly("ys", &Dataset::ys);

  py::enum_<LabelOrder>(m, "LabelOrder")
      .value("none", LabelOrder::none)
      .value("first_larger", LabelOrder::first_larger)
      .value("second_larger", LabelOrder::second_larger);

  py::class_<Prior>(m, "Prior")
      .def(py::init<>())
      .def_static("aligned", &Prior::aligned, py::arg("model"), py::arg("w_star"), py::arg("eta") = 1.0)
      .def_readwrite("eta", &Prior::eta)
      .def_readwrite("order", &Prior::order)
      .def_readwrite("mean_lo", &Prior::mean_lo)
      .def_readwrite("mean_hi", &Prior::mean_hi);

  py::class_<IdentifiabilityReport>(m, "IdentifiabilityReport")
      .def_readonly("min_mixing", &IdentifiabilityReport::min_mixing)
      .def_readonly("component_distance", &IdentifiabilityReport::component_distance)
      .def_readonly("min_eig_ix", &IdentifiabilityReport::min_eig_ix)
      .def_readonly("ok", &IdentifiabilityReport::ok);
  m.def("validate_identifiability", &validate_identifiability);

  m.def(
      "fisher_set",
      [](const ModelSpec& s, const ParamVec& w) {
        const FisherSet f = build_fisher_set(s, w);
        py::dict d;
        d["i_xy"] = rows_of(f.i_xy);
        d["i_x"] = rows_of(f.i_x);
        d["j_xy"] = rows_of(f.j_xy);
        d["i_y_given_x"] = rows_of(f.i_y_given_x);
        d["method"] = to_string(f.method);
        d["quadrature_tail"] = f.quadrature_tail;
        d["warnings"] = f.warnings;
        return d;
      },
      py::arg("model"), py::arg("w"), "Fisher matrices at w as nested lists.");

  m.def(
      "coefficients",
      [](const ModelSpec& s, const ParamVec& w, double alpha) {
        const CoefficientReport r = coefficient_report(s, w, alpha);
        py::dict d;
        d["ml_type1"] = r.ml_type1;
        d["ml_type2"] = r.ml_type2;
        d["ml_type3"] = r.ml_type3;
        d["bayes_type1"] = r.bayes_type1;
        d["bayes_type2p"] = r.bayes_type2p;
        d["bayes_type3p"] = r.bayes_type3p;
        d["prediction"] = r.prediction;
        d["gap_ml_bayes"] = r.gap_ml_bayes;
        d["gap_ml_bayes_alpha"] = r.gap_ml_bayes_alpha;
        d["supplementary_gain"] = r.supplementary_gain;
        d["alpha"] = r.alpha;
        d["eigenvalues"] = r.eigenvalues.values;
        return d;
      },
      py::arg("model"), py::arg("w"), py::arg("alpha") = 1.0);

  m.def("sample_joint", [](const ModelSpec& s, const ParamVec& w, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    return sample_joint(s, w, n, rng);
  }, py::arg("model"), py::arg("w"), py::arg("n"), py::arg("seed"));

  m.def("log_evidence_complete", &log_evidence_complete, py::arg("model"), py::arg("data"), py::arg("prior"));
  m.def(
      "log_evidence_marginal",
      [](const ModelSpec& s, const std::vector<double>& xs, const Prior& p, std::size_t nodes) {
        return log_evidence_marginal(s, xs, p, nodes);
      },
      py::arg("model"), py::arg("xs"), py::arg("prior"), py::arg("nodes_per_axis") = kDefaultNodesPerAxis,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "log_evidence_marginal_enumerated",
      [](const ModelSpec& s, const std::vector<double>& xs, const Prior& p) {
        return log_evidence_marginal_enumerated(s, xs, p);
      },
      py::arg("model"), py::arg("xs"), py::arg("prior"));
  m.def(
      "mle",
      [](const ModelSpec& s, const std::vector<double>& xs, const ParamVec& init) {
        const EmResult r = mle_marginal(s, xs, init);
        py::dict d;
        d["estimate"] = std::vector<double>(r.estimate.values().begin(), r.estimate.values().end());
        d["log_likelihood"] = r.log_likelihood;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["at_boundary"] = r.at_boundary;
        return d;
      },
      py::arg("model"), py::arg("xs"), py::arg("init"), "EM fit of the marginal model from init.");

  py::class_<ErrorEstimate>(m, "ErrorEstimate")
      .def_property_readonly("functional", [](const ErrorEstimate& e) { return to_string(e.functional); })
      .def_property_readonly("method", [](const ErrorEstimate& e) { return to_string(e.method); })
      .def_readonly("n", &ErrorEstimate::n)
      .def_readonly("alpha", &ErrorEstimate::alpha)
      .def_readonly("mean", &ErrorEstimate::mean)
      .def_readonly("std_error", &ErrorEstimate::std_error)
      .def_readonly("replications", &ErrorEstimate::replications)
      .def_readonly("seed", &ErrorEstimate::seed)
      .def_readonly("aborted", &ErrorEstimate::aborted)
      .def_readonly("boundary_hits", &ErrorEstimate::boundary_hits)
      .def_readonly("values", &ErrorEstimate::values)
      .def_property_readonly("scaled_mean", &ErrorEstimate::scaled_mean)
      .def_property_readonly("scaled_std_error", &ErrorEstimate::scaled_std_error);

  py::class_<StudyContext>(m, "StudyContext")
      .def(py::init<ModelSpec, ParamVec, Prior, std::size_t>(), py::arg("model"), py::arg("w_star"), py::arg("prior"),
           py::arg("nodes_per_axis") = kDefaultNodesPerAxis)
      .def_readwrite("threads", &StudyContext::threads)
      .def_readwrite("rao_blackwell", &StudyContext::rao_blackwell)
      .def_readwrite("complete_data_training", &StudyContext::complete_data_training);

  m.def(
      "estimate",
      [](const StudyContext& ctx, const std::string& functional, const std::string& method, std::size_t n,
         std::size_t replications, std::uint64_t seed, double alpha) {
        const Functional f = functional_from_string(functional);
        const Method me = method_from_string(method);
        py::gil_scoped_release release;
        return estimate(ctx, f, me, n, replications, seed, alpha);
      },
      py::arg("context"), py::arg("functional"), py::arg("method"), py::arg("n"), py::arg("replications"),
      py::arg("seed"), py::arg("alpha") = 1.0);

  m.def(
      "convergence_study",
      [](const StudyContext& ctx, const std::string& functional, const std::string& method,
         const std::vector<std::size_t>& n_grid, std::size_t replications, std::uint64_t seed, double alpha) {
        const Functional f = functional_from_string(functional);
        const Method me = method_from_string(method);
        ConvergenceSeries s;
        {
          py::gil_scoped_release release;
          s = convergence_study(ctx, f, me, n_grid, replications, seed, alpha);
        }
        return series_dict(s);
      },
      py::arg("context"), py::arg("functional"), py::arg("method"), py::arg("n_grid"), py::arg("replications"),
      py::arg("seed"), py::arg("alpha") = 1.0);

  m.def("judge", [](double extrapolated, double standard_error, double theory) {
    return to_string(judge(extrapolated, standard_error, theory));
  });
}
