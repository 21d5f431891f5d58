#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "perslab/error.hpp"
#include "perslab/estimators.hpp"
#include "perslab/exact.hpp"
#include "perslab/fluctuation.hpp"
#include "perslab/increments.hpp"

namespace py = pybind11;
using namespace perslab;

namespace {

// Rationals cross the boundary as "num/den" strings; the Python side turns
// them into fractions.Fraction.
std::string q(const Rational& r) { return to_fraction_string(r); }

McOptions mc_options(std::uint64_t seed, unsigned shards) {
  McOptions mc;
  mc.seed = seed;
  mc.shards = shards;
  return mc;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["stderr"] = e.std_error;
  d["n_samples"] = e.n_samples;
  d["ci95"] = py::make_tuple(e.ci_lo, e.ci_hi);
  return d;
}

std::vector<GridPoint> grid_points(const std::vector<std::tuple<double, double, double>>& rows) {
  std::vector<GridPoint> pts;
  for (const auto& [n, v, se] : rows) pts.push_back({n, Estimate::from_value(v, se, 0)});
  return pts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Persistence probabilities of integrated random walks";
  m.attr("__version__") = PERSLAB_VERSION;

  // args are (message, code name).
  static py::exception<Error> error(m, "PerslabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(e.what(), std::string(error_code_name(e.code())));
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  py::class_<IncrementSpec>(m, "IncrementSpec")
      .def_property_readonly("id", &IncrementSpec::id)
      .def_property_readonly("alpha", &IncrementSpec::alpha)
      .def_property_readonly("sigma2", &IncrementSpec::sigma2)
      .def_property_readonly("e_abs", &IncrementSpec::e_abs)
      .def_property_readonly("pos_prob", &IncrementSpec::pos_prob)
      .def_property_readonly("is_lattice", &IncrementSpec::is_lattice)
      .def_property_readonly("is_right_continuous", &IncrementSpec::is_right_continuous)
      .def_property_readonly("is_right_exponential", &IncrementSpec::is_right_exponential)
      .def("pmf", [](const IncrementSpec& s, long k) { return q(s.pmf(k)); })
      .def("serialize", [](const IncrementSpec& s) { return serialize(s); })
      .def("__repr__", [](const IncrementSpec& s) { return "<IncrementSpec " + s.id() + ">"; });

  m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
  m.def("parse_spec", [](const std::string& text) { return parse_spec(text); }, py::arg("text"));

  m.def("exact_persistence", [](const IncrementSpec& s, std::size_t n) { return q(exact_persistence(s, n)); },
        py::arg("spec"), py::arg("n"));
  m.def(
      "exact_persistence_float",
      [](const IncrementSpec& s, std::size_t n, double prune) {
        const auto r = exact_persistence_float(s, n, prune);
        return py::make_tuple(r.value, r.lower, r.upper);
      },
      py::arg("spec"), py::arg("n"), py::arg("prune_below") = 0.0);
  m.def("exact_bridge_persistence",
        [](const IncrementSpec& s, std::size_t n) { return q(exact_bridge_persistence(s, n)); }, py::arg("spec"),
        py::arg("n"));
  m.def("enumerate_persistence", [](const IncrementSpec& s, std::size_t n) { return q(enumerate_persistence(s, n)); },
        py::arg("spec"), py::arg("n"));
  m.def(
      "exact_cycle_law",
      [](const IncrementSpec& s, std::size_t horizon, const std::string& convention) {
        const auto law = exact_cycle_law(s, horizon, parse_convention(convention));
        std::map<std::pair<long, long>, std::string> atoms;
        for (const auto& [k, v] : law.pair_law.atoms) atoms[k] = q(v);
        return py::make_tuple(atoms, q(law.residual));
      },
      py::arg("spec"), py::arg("horizon"), py::arg("convention") = "weak-up");
  m.def(
      "symmetry_audit",
      [](const IncrementSpec& s, std::size_t horizon, const std::string& convention) {
        const auto a = symmetry_audit(exact_cycle_law(s, horizon, parse_convention(convention)).pair_law);
        return py::make_tuple(q(a.max_abs_asymmetry), a.worst_atom);
      },
      py::arg("spec"), py::arg("horizon"), py::arg("convention") = "weak-up");

  m.def(
      "positivity_probs",
      [](const IncrementSpec& s, std::size_t n_max, bool weak) {
        const auto seq = positivity_probs(s, n_max, weak ? PositivityMode::Weak : PositivityMode::Strict);
        std::vector<std::string> out;
        for (std::size_t n = 1; n <= n_max; ++n) out.push_back(q(seq.probs[n]));
        return out;
      },
      py::arg("spec"), py::arg("n_max"), py::arg("weak") = false);
  m.def(
      "sparre_andersen",
      [](const std::vector<std::string>& probs) {
        PositivitySeq<Rational> seq;
        seq.probs.push_back(1);
        for (const auto& p : probs) seq.probs.push_back(parse_rational(p));
        std::vector<std::string> out;
        for (const auto& v : sparre_andersen(seq)) out.push_back(q(v));
        return out;
      },
      py::arg("probs"), "q_0..q_n from probs[k] = P(S_k > 0), k = 1..n, given as 'num/den' strings.");
  m.def("symmetric_continuous_qn", [](std::size_t n) { return q(symmetric_continuous_qn(n)); }, py::arg("n"));
  m.def(
      "halfplane_measures",
      [](const std::string& bspec, std::size_t n) {
        const auto t = halfplane_measures(bivariate_preset(bspec), n);
        py::list rows;
        for (const auto& r : t.rows)
          rows.append(py::make_tuple(r.x, q(r.lhs1), q(r.rhs1), q(r.lhs2), q(r.rhs2)));
        return rows;
      },
      py::arg("bspec"), py::arg("n"));

  m.def(
      "mc_persistence",
      [](const IncrementSpec& s, std::size_t n, std::size_t samples, std::uint64_t seed, unsigned shards) {
        Estimate e;
        {
          py::gil_scoped_release release;
          e = mc_persistence(s, n, samples, mc_options(seed, shards));
        }
        return estimate_dict(e);
      },
      py::arg("spec"), py::arg("n"), py::arg("samples"), py::arg("seed") = 20240601, py::arg("shards") = 1);
  m.def(
      "fit_exponent",
      [](const std::vector<std::tuple<double, double, double>>& rows) {
        const auto f = fit_exponent(grid_points(rows));
        py::dict d;
        d["slope"] = f.slope;
        d["slope_lo"] = f.slope_lo;
        d["slope_hi"] = f.slope_hi;
        d["intercept"] = f.intercept;
        d["r2"] = f.r2;
        return d;
      },
      py::arg("rows"), "rows of (n, value, stderr); stderr 0 for exact values.");
  m.def(
      "estimate_constant",
      [](const std::vector<std::tuple<double, double, double>>& rows, double alpha) {
        return estimate_dict(estimate_constant(grid_points(rows), alpha));
      },
      py::arg("rows"), py::arg("alpha"));
  m.def(
      "reference_constants",
      [](const IncrementSpec& s) {
        const auto r = reference_constants(s);
        py::dict d;
        d["c1"] = r.c1;
        d["c2"] = r.c2;
        d["eqc_interval"] = r.eqc_interval;
        return d;
      },
      py::arg("spec"));
  m.def(
      "mc_eta_scaling",
      [](const IncrementSpec& s, std::size_t n, std::size_t samples, std::uint64_t seed, unsigned shards) {
        const auto e = mc_eta_scaling(s, n, samples, mc_options(seed, shards));
        py::dict d;
        d["scaled"] = e.scaled;
        d["ks_p_value"] = e.ks ? py::cast(e.ks->p_value) : py::none();
        return d;
      },
      py::arg("spec"), py::arg("n"), py::arg("samples"), py::arg("seed") = 20240601, py::arg("shards") = 1);
}
