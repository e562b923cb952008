// Python bindings for the descriptor, potential, distance, bounds and limit APIs.

#include "tcone/bounds.hpp"
#include "tcone/io.hpp"
#include "tcone/probes.hpp"
#include "tcone/tangentcone.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tcone;

namespace {

Point3 pt(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
py::tuple tup(const Point3& p) { return py::make_tuple(p.zr, p.zc1, p.zc2); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conformal potential metrics, rescaling limits and tangent cones";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  py::class_<MetricDescriptor>(m, "Metric")
      .def_static("euclidean", &MetricDescriptor::euclidean)
      .def_static("inverse_radial", &MetricDescriptor::inverse_radial, py::arg("theta"))
      .def_static("affine", &MetricDescriptor::affine, py::arg("c"), py::arg("theta"))
      .def_static("potential_st", &MetricDescriptor::potential_st, py::arg("S"), py::arg("T"), py::arg("P") = 1.0,
                  py::arg("alpha") = 2.0)
      .def_static("parse", &parse_descriptor, py::arg("text"))
      .def_property_readonly("name", &MetricDescriptor::name)
      .def_property_readonly("fingerprint", &MetricDescriptor::fingerprint)
      .def("__repr__", [](const MetricDescriptor& d) { return "Metric('" + d.name() + "')"; });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("grid_resolution", &SolverConfig::grid_resolution)
      .def_readwrite("refinement_rounds", &SolverConfig::refinement_rounds)
      .def_readwrite("quadrature_tol", &SolverConfig::quadrature_tol)
      .def_readwrite("domain_padding", &SolverConfig::domain_padding);

  m.def(
      "potential",
      [](const MetricDescriptor& d, std::array<double, 3> z, double tol) {
        const auto r = conformal_factor(d, pt(z), tol);
        return py::make_tuple(r.value, r.error_bound);
      },
      py::arg("metric"), py::arg("point"), py::arg("tol") = 1e-10, "(value, error_bound) of the conformal factor");

  m.def(
      "distance",
      [](const MetricDescriptor& d, std::array<double, 3> x, std::array<double, 3> y, const SolverConfig& cfg) {
        const auto r = distance(d, pt(x), pt(y), cfg);
        py::list witness;
        for (const auto& v : r.witness.vertices) witness.append(tup(v));
        py::dict out;
        out["value"] = r.value;
        out["lower"] = r.lower_bound;
        out["upper"] = r.upper_bound;
        out["witness"] = witness;
        return out;
      },
      py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("config") = SolverConfig{});

  m.def(
      "check_conv1",
      [](double alpha, const std::string& K, double a, double P, double R, double D, std::size_t n, std::uint64_t seed) {
        const auto rep = check_conv1(make_lattice(alpha, parse_ksequence(K)), {a, P}, R, D, n, seed);
        py::dict out;
        out["bound_id"] = rep.bound_id;
        out["samples"] = rep.samples;
        out["worst_margin"] = rep.worst_margin;
        out["vacuous"] = rep.vacuous;
        out["passed"] = rep.passed();
        return out;
      },
      py::arg("alpha") = 2.0, py::arg("K") = "geometric,1,10", py::arg("a") = 1e-4, py::arg("P") = 1.0,
      py::arg("R") = 4.0, py::arg("D") = 0.5, py::arg("n") = 200, py::arg("seed") = 1);

  m.def(
      "classify_limit",
      [](double alpha, const std::string& K, const std::string& rule, double value, std::size_t horizon) {
        SequenceRule r;
        if (rule == "pin_lower")
          r = SequenceRule::pin_lower(value);
        else if (rule == "pin_upper")
          r = SequenceRule::pin_upper(value);
        else if (rule == "theta")
          r = SequenceRule::theta(value);
        else
          throw std::invalid_argument("rule must be pin_lower, pin_upper or theta");
        const auto spec = make_lattice(alpha, parse_ksequence(K));
        const auto lim = classify_limit(limit_invariants(spec, r, horizon), spec);
        return py::make_tuple(lim.family_name(), lim.label());
      },
      py::arg("alpha"), py::arg("K"), py::arg("rule"), py::arg("value"), py::arg("horizon") = 24,
      "(family, label) of the rescaling limit");

  m.def(
      "table1",
      [](double alpha) {
        py::list out;
        for (const auto& row : table1(alpha)) out.append(py::make_tuple(row.metric, row.at_origin, row.at_infinity));
        return out;
      },
      py::arg("alpha") = 2.0);

  m.def(
      "axis_segment_length",
      [](double alpha, double t0, double t1, const std::vector<double>& deltas) {
        return axis_segment_length(alpha, t0, t1, deltas);
      },
      py::arg("alpha"), py::arg("t0"), py::arg("t1"), py::arg("deltas"));
}
