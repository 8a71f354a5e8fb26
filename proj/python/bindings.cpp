#include <map>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resilience/diagnostics.hpp"
#include "resilience/error.hpp"
#include "resilience/fb_screening.hpp"
#include "resilience/mfpca_composite.hpp"
#include "resilience/pca_engine.hpp"
#include "resilience/synth_oracle.hpp"
#include "resilience/valuation.hpp"

namespace py = pybind11;
using namespace resilience;

namespace {

VariateSeries series_from(const Eigen::MatrixXd& values, Variate variate) {
  VariateSeries s;
  s.variate = variate;
  s.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) s.firms.push_back("f" + std::to_string(i));
  YearMonth ym{2000, 1};
  for (Eigen::Index t = 0; t < values.cols(); ++t, ym = ym.next()) s.grid.push_back(ym);
  return s;
}

py::dict ufpca_dict(const UfpcaResult& r) {
  py::dict d;
  d["mean_curve"] = r.mean_curve;
  d["eigenvalues"] = r.eigenvalues;
  d["eigenfunctions"] = r.eigenfunctions;
  d["scores"] = r.scores;
  return d;
}

std::vector<std::string> label_names(const std::vector<ResilienceLabel>& labels) {
  std::vector<std::string> out;
  for (auto l : labels) out.emplace_back(to_string(l));
  return out;
}

std::map<std::string, std::string> group_names(const GroupAssignment& g) {
  std::map<std::string, std::string> out;
  for (const auto& [firm, label] : g.labels) out.emplace(firm, std::string(to_string(label)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Resilience indexes, implied discount rates and diagnostics";
  static py::exception<Error> error(m, "ResilienceError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("pv", [](double r, double b, double g, const EpsTriple& eps) { return pv(r, b, g, eps); },
        py::arg("r"), py::arg("b"), py::arg("g"), py::arg("eps"));
  m.def(
      "implied_dr",
      [](double price, double b, double g, const EpsTriple& eps, double epsilon, double r_max) {
        SolverOptions o;
        o.epsilon = epsilon;
        o.r_max = r_max;
        const DrSolution s = implied_dr(price, b, g, eps, o);
        return py::make_tuple(std::string(to_string(s.status)), s.r);
      },
      py::arg("price"), py::arg("b"), py::arg("g"), py::arg("eps"), py::arg("epsilon") = 1e-6,
      py::arg("r_max") = 10.0, "Returns (status, r); r is NaN unless status is 'Solved'.");

  m.def(
      "pca",
      [](const Eigen::MatrixXd& x) {
        const PcaResult r = pca(standardize(x));
        py::dict d;
        d["eigenvalues"] = r.eigenvalues;
        d["loadings"] = r.loadings;
        d["explained"] = r.explained;
        d["scores"] = r.scores;
        d["var_pc_corr"] = r.var_pc_corr;
        return d;
      },
      py::arg("x"), "PCA of the correlation matrix of the columns of x (complete rows only).");
  m.def(
      "oracle_eigen",
      [](const Eigen::MatrixXd& a) {
        const auto r = synth::oracle_eigen(a);
        return py::make_tuple(r.values, r.vectors);
      },
      py::arg("a"));

  auto ttest = [](const TTest& t) { return py::make_tuple(t.t, t.dof, t.p); };
  m.def("welch_test", [ttest](const std::vector<double>& a, const std::vector<double>& b) { return ttest(welch_test(a, b)); },
        py::arg("a"), py::arg("b"), "Returns (t, dof, p).");
  m.def("pooled_t", [ttest](const std::vector<double>& a, const std::vector<double>& b) { return ttest(pooled_t(a, b)); },
        py::arg("a"), py::arg("b"), "Returns (t, dof, p).");

  m.def(
      "categorize_kp",
      [](const std::map<std::string, double>& shares, double low, double high) {
        return group_names(categorize_kp(shares, low, high));
      },
      py::arg("shares"), py::arg("low_cut") = 40.0, py::arg("high_cut") = 65.0);
  m.def(
      "categorize_fb",
      [](const std::map<std::string, double>& fb, double lo, double hi) { return group_names(categorize_fb(fb, lo, hi)); },
      py::arg("fb"), py::arg("lo_pct") = 33.0, py::arg("hi_pct") = 66.0);
  m.def(
      "categorize_cf",
      [](const std::vector<double>& rho, double lo, double hi) { return label_names(categorize_cf(rho, lo, hi)); },
      py::arg("rho"), py::arg("low_pct") = 33.0, py::arg("high_pct") = 66.0);

  m.def(
      "paper_loadings",
      [](const std::string& period) {
        const auto l = paper_loadings(period == "after" ? PeriodLabel::After : PeriodLabel::Before);
        return py::make_tuple(l.ratios.codes(), l.weights);
      },
      py::arg("period") = "before", "Returns (ratio codes, weights).");
  m.def("fb_value", [](const std::array<double, 3>& w, const std::array<double, 3>& z) { return fb_value(w, z); },
        py::arg("weights"), py::arg("z"));

  m.def(
      "ufpca", [](const Eigen::MatrixXd& x, std::size_t components) { return ufpca_dict(ufpca(series_from(x, Variate::KP), components)); },
      py::arg("x"), py::arg("components"), "Discrete-grid functional PCA of an N x T matrix.");
  m.def(
      "mfpca",
      [](const Eigen::MatrixXd& kp, const Eigen::MatrixXd& fb, std::size_t components) {
        const auto kp_fit = ufpca(series_from(kp, Variate::KP), components);
        const auto fb_fit = ufpca(series_from(fb, Variate::FB), components);
        const auto r = mfpca_combine(kp_fit, fb_fit, components);
        py::dict d;
        d["zeta"] = r.zeta;
        d["rho"] = r.rho;
        d["nu"] = r.nu;
        d["explained"] = r.explained;
        return d;
      },
      py::arg("kp"), py::arg("fb"), py::arg("components") = 1, "Composite scores from KP and FB curves (N x T each).");
}
