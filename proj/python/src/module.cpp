#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wavestruct/cq.hpp"
#include "wavestruct/scenarios.hpp"
#include "wavestruct/selftest.hpp"
#include "wavestruct/specfun.hpp"

namespace py = pybind11;
namespace ws = wavestruct;

namespace {

ws::cq::TimeSignal signal_from(double final_time, const ws::cq::CMatrix& values) {
  const auto grid = ws::cq::TimeGrid::make(final_time, static_cast<int>(values.cols()) - 1);
  return {grid, values};
}

py::dict row_dict(const ws::scenarios::ReportRow& r) {
  py::dict d;
  d["N"] = r.n;
  d["M"] = r.m;
  d["ok"] = r.ok;
  d["message"] = r.message;
  d["E_u"] = r.e_u;
  d["E_v"] = r.e_v;
  d["ecr_u"] = r.ecr_u;
  d["ecr_v"] = r.ecr_v;
  d["E_u_L2"] = r.e_u_l2;
  d["E_u_H1"] = r.e_u_h1;
  d["ecr_u_L2"] = r.ecr_u_l2;
  d["ecr_u_H1"] = r.ecr_u_h1;
  d["seconds"] = r.seconds;
  d["unknowns"] = r.unknowns;
  return d;
}

}  // namespace

PYBIND11_MODULE(_wavestruct, m) {
  m.doc() = "Transient acoustic-elastic scattering: special functions, CQ and studies";

  py::register_exception<ws::specfun::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ws::ParameterError>(m, "ParameterError", PyExc_ValueError);

  m.def("bessel_k", &ws::specfun::bessel_k, py::arg("order"), py::arg("z"));
  m.def("bessel_i", &ws::specfun::bessel_i, py::arg("order"), py::arg("z"));

  m.def(
      "cq_weights",
      [](const std::string& scheme, double final_time, int steps,
         const std::function<ws::cq::cplx(ws::cq::cplx)>& transfer) {
        return ws::cq::weights(ws::cq::parse_scheme(scheme),
                               ws::cq::TimeGrid::make(final_time, steps), transfer);
      },
      py::arg("scheme"), py::arg("final_time"), py::arg("steps"), py::arg("transfer"));

  // values: dofs x (M+1), column n at t_n
  m.def(
      "cq_convolve",
      [](const std::string& scheme, double final_time, const ws::cq::CMatrix& values,
         const std::function<ws::cq::cplx(ws::cq::cplx)>& transfer) {
        return ws::cq::convolve(ws::cq::parse_scheme(scheme), signal_from(final_time, values),
                                transfer)
            .values;
      },
      py::arg("scheme"), py::arg("final_time"), py::arg("values"), py::arg("transfer"));

  m.def("default_config", [](const std::string& geometry, const std::string& scheme) {
    const auto s = ws::cq::parse_scheme(scheme);
    if (geometry == "disk") return ws::scenarios::config_to_json(ws::scenarios::disk_study(s));
    if (geometry == "rectangle") {
      return ws::scenarios::config_to_json(ws::scenarios::rectangle_study(s));
    }
    throw ws::ParameterError("default_config: geometry must be 'disk' or 'rectangle'");
  });

  m.def(
      "run_study",
      [](const std::string& config_json) {
        const auto config = ws::scenarios::parse_config(config_json);
        ws::scenarios::ConvergenceReport report;
        {
          py::gil_scoped_release release;
          report = ws::scenarios::run_convergence(config);
        }
        std::ostringstream csv, meta;
        ws::scenarios::write_report_csv(csv, report);
        ws::scenarios::write_report_metadata(meta, report);
        py::list rows;
        for (const auto& r : report.rows) rows.append(row_dict(r));
        py::dict out;
        out["rows"] = rows;
        out["csv"] = csv.str();
        out["metadata"] = meta.str();
        return out;
      },
      py::arg("config_json"));

  m.def("selftest", [] {
    py::list out;
    for (const auto& c : ws::selftest::run_all()) out.append(py::make_tuple(c.name, c.passed, c.detail));
    return out;
  });
}
