#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "hypstrata/flow.hpp"
#include "hypstrata/sensitivity.hpp"
#include "hypstrata/strata.hpp"
#include "hypstrata/verify.hpp"

namespace py = pybind11;
using namespace hypstrata;

namespace {

RootConfiguration make_rc(std::vector<double> roots, std::optional<std::vector<int>> mults) {
  if (!mults) return RootConfiguration::simple(std::move(roots));
  return RootConfiguration(std::move(roots), std::move(*mults));
}

py::tuple rc_tuple(const RootConfiguration& rc) {
  return py::make_tuple(std::vector<double>(rc.roots().begin(), rc.roots().end()),
                        std::vector<int>(rc.mults().begin(), rc.mults().end()));
}

std::vector<std::vector<double>> matrix_rows(const SensitivityMatrix& s) {
  std::vector<std::vector<double>> out(s.rows(), std::vector<double>(s.cols()));
  for (std::size_t j = 0; j < s.rows(); ++j)
    for (std::size_t i = 0; i < s.cols(); ++i) out[j][i] = s(j, i);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Configuration vectors, sensitivities and flows for hyperbolic polynomials";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "derivative_roots",
      [](std::vector<double> roots, std::optional<std::vector<int>> mults, int k) {
        return derivative_roots(make_rc(std::move(roots), std::move(mults)), k).roots;
      },
      py::arg("roots"), py::arg("mults") = py::none(), py::arg("k") = 1);

  m.def(
      "classify",
      [](std::vector<double> roots, std::optional<std::vector<int>> mults, int k) {
        return classify(make_rc(std::move(roots), std::move(mults)), k).str();
      },
      py::arg("roots"), py::arg("mults") = py::none(), py::arg("k") = 1);

  m.def(
      "enumerate",
      [](int n, int k, std::optional<int> dim) {
        std::vector<std::string> out;
        for (const auto& cv : enumerate_cvs(n, k, dim)) out.push_back(cv.str());
        return out;
      },
      py::arg("n"), py::arg("k"), py::arg("dim") = py::none());

  m.def(
      "dimension", [](const std::string& cv, int k) { return dimension(ConfigVector::parse(cv, k)).conv_dim; },
      py::arg("cv"), py::arg("k"));

  m.def(
      "is_admissible", [](const std::string& cv, int k) { return is_admissible(ConfigVector::parse(cv, k)); },
      py::arg("cv"), py::arg("k"));

  m.def(
      "sensitivity",
      [](std::vector<double> roots, std::optional<std::vector<int>> mults, int k) {
        return matrix_rows(sensitivity_matrix(make_rc(std::move(roots), std::move(mults)), k));
      },
      py::arg("roots"), py::arg("mults") = py::none(), py::arg("k") = 1);

  m.def(
      "sensitivity_fd",
      [](std::vector<double> roots, int k) { return matrix_rows(sensitivity_fd(RootConfiguration::simple(roots), k)); },
      py::arg("roots"), py::arg("k") = 1);

  m.def(
      "zero_dim_point", [](const std::string& cv, int k) { return rc_tuple(zero_dim_point(ConfigVector::parse(cv, k))); },
      py::arg("cv"), py::arg("k"));

  m.def(
      "sample_point",
      [](const std::string& cv, int k, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return rc_tuple(sample_point(ConfigVector::parse(cv, k), rng));
      },
      py::arg("cv"), py::arg("k"), py::arg("seed") = 7);

  m.def(
      "retract",
      [](std::vector<double> roots, std::optional<std::vector<int>> mults, int k, const std::string& policy,
         std::uint64_t seed) {
        const auto res = retract(make_rc(std::move(roots), std::move(mults)), k, parse_policy(policy), seed);
        py::list chain;
        for (const auto& link : res.chain) chain.append(py::make_tuple(link.cv.str(), rc_tuple(link.rc)));
        py::list sigmas;
        for (const auto& leg : res.legs) sigmas.append(leg.sigma0);
        py::dict out;
        out["chain"] = chain;
        out["sigma0"] = sigmas;
        out["final_cv"] = res.final().cv.str();
        out["final"] = rc_tuple(res.final().rc);
        return out;
      },
      py::arg("roots"), py::arg("mults") = py::none(), py::arg("k") = 1, py::arg("policy") = "targeted",
      py::arg("seed") = 0);

  m.def(
      "verify",
      [](const std::string& suite, int n_max, int samples, std::uint64_t seed) {
        const auto rep = run_suite(suite, {n_max, samples, seed, 0});
        py::dict props;
        for (const auto& p : rep.properties) {
          py::dict d;
          d["pass"] = p.pass;
          d["worst"] = p.worst;
          d["checked"] = p.checked;
          d["skipped"] = p.skipped;
          props[py::str(p.name)] = d;
        }
        py::dict out;
        out["suite"] = rep.suite;
        out["ok"] = rep.ok();
        out["properties"] = props;
        return out;
      },
      py::arg("suite"), py::arg("n_max") = 6, py::arg("samples") = 50, py::arg("seed") = 7);
}
