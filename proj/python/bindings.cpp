#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <tuple>
#include <vector>

#include "amf/cluster.hpp"
#include "amf/error.hpp"
#include "amf/fdr.hpp"
#include "amf/gibs.hpp"
#include "amf/lasso.hpp"
#include "amf/model_tests.hpp"
#include "amf/regression.hpp"
#include "amf/synth.hpp"
#include "amf/vol_anomaly.hpp"

namespace py = pybind11;

namespace {

struct GibsSelection {
  std::vector<std::string> selected;
  std::vector<std::string> significant;
  std::vector<std::string> true_support;
  double adj_r2 = 0.0;
  double alpha = 0.0;
  double alpha_p = 1.0;
};

// Draws one synthetic panel and runs the full pipeline on every security.
std::vector<GibsSelection> gibs_synthetic(int n_obs, int n_basis, int n_securities, int sparsity, double correlation,
                                          double noise_sd, double threshold, std::uint64_t seed) {
  amf::SyntheticSpec spec;
  spec.n_obs = n_obs;
  spec.n_basis = n_basis;
  spec.n_securities = n_securities;
  spec.sparsity = sparsity;
  spec.correlation = correlation;
  spec.noise_sd = noise_sd;
  spec.seed = seed;
  const amf::SyntheticData data = amf::synthesize(spec);

  amf::GibsConfig config;
  config.category_threshold = threshold;
  config.global_threshold = threshold;
  config.seed = seed;
  const amf::PreparedUniverse prep = amf::prepare_universe(amf::excess_window(data.basis, data.rf, 0, n_obs), config);
  const amf::ReturnsPanel excess = amf::excess_returns(data.securities, data.rf);

  std::vector<GibsSelection> out;
  for (const auto& r : amf::gibs_run(excess, prep, config)) {
    if (!r.ok()) throw amf::Error(amf::ErrorCode::kDegenerateAfterSelection, r.security + ": " + r.error);
    GibsSelection s;
    s.selected = r.selected;
    s.significant = r.significant;
    s.adj_r2 = r.adj_r2;
    s.alpha = r.alpha;
    s.alpha_p = r.alpha_p;
    for (amf::Index j : data.supports[out.size()]) s.true_support.push_back(data.basis.panel.assets[std::size_t(j)]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_amf, m) {
  m.doc() = "Sparse factor selection, FDR control and model tests";

  // The exception instance carries the error code name as `code`.
  static PyObject* amf_error = py::exception<amf::Error>(m, "AmfError", PyExc_RuntimeError).inc_ref().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const amf::Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(amf_error)(e.what());
      err.attr("code") = std::string(amf::to_string(e.code()));
      PyErr_SetObject(amf_error, err.ptr());
    }
  });

  py::class_<amf::LassoFit>(m, "LassoFit")
      .def_readonly("beta", &amf::LassoFit::beta)
      .def_readonly("intercept", &amf::LassoFit::intercept)
      .def_readonly("sweeps", &amf::LassoFit::sweeps);

  m.def(
      "lasso_fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lam, double alpha, bool standardize,
         bool fit_intercept) {
        amf::LassoOptions opt;
        opt.alpha = alpha;
        opt.standardize = standardize;
        opt.fit_intercept = fit_intercept;
        return amf::lasso_fit(X, y, lam, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("alpha") = 1.0, py::arg("standardize") = true,
      py::arg("fit_intercept") = true,
      "Minimize (1/2n)|y - b0 - X b|^2 + lam * penalty(b) by coordinate descent.");

  m.def(
      "lambda_max",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool standardize, bool fit_intercept) {
        amf::LassoOptions opt;
        opt.standardize = standardize;
        opt.fit_intercept = fit_intercept;
        return amf::lambda_max(X, y, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("standardize") = true, py::arg("fit_intercept") = true);

  m.def("soft_threshold", &amf::soft_threshold, py::arg("z"), py::arg("gamma"));

  m.def(
      "adjust_pvalues",
      [](const Eigen::VectorXd& p, const std::string& method) {
        if (method != "bh" && method != "bhy") throw amf::Error(amf::ErrorCode::kConfig, "method must be 'bh' or 'bhy'");
        return amf::adjust(p, method == "bh" ? amf::FdrMethod::kBH : amf::FdrMethod::kBHY).q_values;
      },
      py::arg("p"), py::arg("method") = "bh", "Step-up q-values (Benjamini-Hochberg or Benjamini-Yekutieli).");

  m.def(
      "minimax_cluster",
      [](const Eigen::MatrixXd& d) {
        const amf::Dendrogram dend = amf::minimax_cluster({d});
        std::vector<std::tuple<amf::Index, amf::Index, double, amf::Index>> merges;
        for (const auto& mg : dend.merges) merges.emplace_back(mg.a, mg.b, mg.height, mg.prototype);
        return merges;
      },
      py::arg("d"), "Merges as (a, b, height, prototype); new clusters are numbered from n.");

  py::class_<amf::OlsFit>(m, "OlsFit")
      .def_readonly("coefficients", &amf::OlsFit::coefficients)
      .def_readonly("std_errors", &amf::OlsFit::std_errors)
      .def_readonly("p_values", &amf::OlsFit::p_values)
      .def_readonly("residuals", &amf::OlsFit::residuals)
      .def_readonly("r2", &amf::OlsFit::r2)
      .def_readonly("adj_r2", &amf::OlsFit::adj_r2);

  m.def(
      "ols",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept) {
        return amf::ols(X, y, intercept ? amf::Intercept::kAdd : amf::Intercept::kNone);
      },
      py::arg("X"), py::arg("y"), py::arg("intercept") = true);

  m.def(
      "intercept_test",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
        const auto r = amf::intercept_test(y, X);
        return py::make_tuple(r.alpha, r.p_value);
      },
      py::arg("y"), py::arg("X"), "Returns (alpha, p_value).");

  m.def(
      "intercept_test_two_step",
      [](const Eigen::VectorXd& y_levels, const Eigen::MatrixXd& V) {
        const auto r = amf::intercept_test_two_step(y_levels, V);
        return py::make_tuple(r.alpha, r.p_value);
      },
      py::arg("y_levels"), py::arg("V"), "Returns (alpha, p_value).");

  m.def(
      "welch_test",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const auto r = amf::welch_test(a, b);
        return py::make_tuple(r.t_stat, r.df, r.p_value);
      },
      py::arg("a"), py::arg("b"), "One-sided test of mean(a) <= mean(b); returns (t, df, p).");

  m.def("cumulative_capital", &amf::cumulative_capital, py::arg("returns"));

  py::class_<GibsSelection>(m, "GibsSelection")
      .def_readonly("selected", &GibsSelection::selected)
      .def_readonly("significant", &GibsSelection::significant)
      .def_readonly("true_support", &GibsSelection::true_support)
      .def_readonly("adj_r2", &GibsSelection::adj_r2)
      .def_readonly("alpha", &GibsSelection::alpha)
      .def_readonly("alpha_p", &GibsSelection::alpha_p);

  m.def("gibs_synthetic", &gibs_synthetic, py::arg("n_obs") = 300, py::arg("n_basis") = 50,
        py::arg("n_securities") = 4, py::arg("sparsity") = 3, py::arg("correlation") = 0.5,
        py::arg("noise_sd") = 0.01, py::arg("threshold") = 0.2, py::arg("seed") = 1);
}
