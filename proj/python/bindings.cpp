#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fairdef/comparators.hpp"
#include "fairdef/config.hpp"
#include "fairdef/defense.hpp"
#include "fairdef/error.hpp"
#include "fairdef/experiment.hpp"
#include "fairdef/fairness.hpp"
#include "fairdef/report.hpp"
#include "fairdef/synthetic.hpp"

namespace py = pybind11;
using namespace fairdef;

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows of x already carry the trailing constant column; s in {0,1}; y in {-1,+1}.
Dataset to_points(const Matrix& x, const Eigen::VectorXi& s, const Eigen::VectorXi& y) {
  if (x.rows() != s.size() || x.rows() != y.size()) {
    throw Error(ErrorKind::kShape, "x, s and y differ in length");
  }
  Dataset out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& p = out[static_cast<std::size_t>(i)];
    p.x = x.row(i).transpose();
    p.s = s(i);
    p.y = y(i);
    if ((p.s != 0 && p.s != 1) || (p.y != 1 && p.y != -1)) {
      throw Error(ErrorKind::kEncoding, "s must be 0/1 and y must be -1/+1");
    }
  }
  return out;
}

py::tuple from_points(const Dataset& d) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.size());
  const Eigen::Index dim = d.empty() ? 0 : d.front().x.size();
  Matrix x(n, dim);
  Eigen::VectorXi s(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = d[static_cast<std::size_t>(i)];
    x.row(i) = p.x.transpose();
    s(i) = p.s;
    y(i) = p.y;
  }
  return py::make_tuple(x, s, y);
}

using PointTuple = std::tuple<Matrix, Eigen::VectorXi, Eigen::VectorXi>;

std::vector<Dataset> to_lists(const std::vector<PointTuple>& items) {
  std::vector<Dataset> out;
  for (const auto& [x, s, y] : items) out.push_back(to_points(x, s, y));
  return out;
}

DatasetSpec spec_by_name(const std::string& name) { return dataset_spec(name); }

}  // namespace

PYBIND11_MODULE(_fairdef, m) {
  m.doc() = "Server-side fairness defense for one-shot collaborative learning";

  py::register_exception<Error>(m, "FairdefError", PyExc_RuntimeError);

  m.def("project_simplex",
        [](const Eigen::VectorXd& v) { return project_simplex(v).vector(); }, py::arg("v"));
  m.def("fedasl_weights",
        [](const Eigen::VectorXd& losses, double alpha, double beta) {
          FedAslParams p;
          p.alpha = alpha;
          p.beta = beta;
          return fedasl_weights(losses, p).vector();
        },
        py::arg("losses"), py::arg("alpha") = 0.9, py::arg("beta") = 0.2);
  m.def("fednolowe_weights",
        [](const Eigen::VectorXd& losses) { return fednolowe_weights(losses).vector(); },
        py::arg("losses"));

  m.def("spd",
        [](const Matrix& x, const Eigen::VectorXi& s, const Eigen::VectorXi& y,
           const Eigen::VectorXd& theta) { return spd(to_points(x, s, y), theta); },
        py::arg("x"), py::arg("s"), py::arg("y"), py::arg("theta"));
  m.def("eod",
        [](const Matrix& x, const Eigen::VectorXi& s, const Eigen::VectorXi& y,
           const Eigen::VectorXd& theta) { return eod(to_points(x, s, y), theta); },
        py::arg("x"), py::arg("s"), py::arg("y"), py::arg("theta"));

  m.def("synthetic_csv",
        [](const std::string& kind, std::size_t rows, std::uint64_t seed) {
          if (kind == "law_school") return make_law_like_csv(rows, seed);
          if (kind == "dutch") return make_dutch_like_csv(rows, seed);
          throw Error(ErrorKind::kConfig, "unknown synthetic kind '" + kind + "'");
        },
        py::arg("kind"), py::arg("rows"), py::arg("seed") = 0);
  m.def("parse_dataset",
        [](const std::string& text, const std::string& name) {
          return from_points(parse_dataset(text, spec_by_name(name)));
        },
        py::arg("text"), py::arg("name"), "Returns (x, s, y); x ends with the constant column.");
  m.def("load_dataset",
        [](const std::string& path, const std::string& name) {
          return from_points(load_dataset(path, spec_by_name(name)));
        },
        py::arg("path"), py::arg("name"));

  m.def("run_defense",
        [](const std::vector<PointTuple>& proxies, const std::vector<PointTuple>& roots, double nu,
           int t_max) {
          PenaltyConfig cfg;
          cfg.nu = nu;
          cfg.t_max = t_max;
          const DefenseResult r = run_defense(to_lists(proxies), to_lists(roots), cfg);
          py::dict out;
          out["weights"] = r.weights.vector();
          out["theta"] = r.theta;
          out["iterations"] = r.trace.records.size();
          return out;
        },
        py::arg("proxies"), py::arg("roots"), py::arg("nu") = 0.0, py::arg("t_max") = 2000);

  m.def("run_config",
        [](const std::string& text, const std::string& base_dir, const std::string& out_dir) {
          RunConfig cfg = parse_config(text, base_dir);
          if (!out_dir.empty()) cfg.out_dir = out_dir;
          const auto specs = expand_specs(cfg);
          const ExperimentResult res = run_experiment(specs, load_datasets(cfg), cfg.experiment);
          emit_report(res.runs, cfg.out_dir);
          std::vector<std::string> records;
          for (const auto& r : res.runs) records.push_back(run_record_to_json(r));
          return records;
        },
        py::arg("text"), py::arg("base_dir") = "", py::arg("out_dir") = "",
        "Runs the sweep described by INI text, writes the report and returns the JSON run records.");
}
