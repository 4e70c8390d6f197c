#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "ribound/cli.hpp"
#include "ribound/impute.hpp"
#include "ribound/infer.hpp"
#include "ribound/refdist.hpp"
#include "ribound/sim.hpp"

namespace py = pybind11;
using namespace ribound;

namespace {

using Null = std::variant<double, std::vector<double>>;

Dataset build(const std::vector<long long>& w, const std::vector<double>& y,
              const std::optional<std::vector<std::string>>& blocks) {
  if (w.size() != y.size() || (blocks && blocks->size() != w.size()))
    throw Error(Errc::LengthMismatch, "w, y and blocks must have equal length");
  std::vector<RawRow> rows(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    rows[i].id = std::to_string(i + 1);
    rows[i].w = w[i];
    rows[i].y = y[i];
    if (blocks) rows[i].block = (*blocks)[i];
  }
  return validate_dataset(rows);
}

EffectSpec effect(const Null& null) {
  if (const auto* c = std::get_if<double>(&null)) return EffectSpec::constant(*c);
  return EffectSpec::per_unit(std::get<std::vector<double>>(null));
}

Mode mode_of(const std::string& mode, std::uint64_t draws, std::uint64_t seed, bool add_one) {
  if (mode == "exact") return ExactMode{};
  if (mode == "mc") return MonteCarloMode{seed, draws, add_one};
  throw Error(Errc::InvalidArgument, "mode must be 'exact' or 'mc', got '" + mode + "'");
}

py::dict p_dict(const PValue& p) {
  py::dict d;
  d["p"] = p.p;
  d["count"] = p.count;
  d["total"] = p.total;
  d["tail"] = to_string(p.tail);
  d["exact"] = p.exact;
  return d;
}

py::dict bounded_dict(const BoundedTestResult& r) {
  py::dict d;
  d["direction"] = to_string(r.direction);
  d["statistic"] = r.statistic;
  d["observed"] = r.observed;
  d["p_value"] = p_dict(r.p);
  d["alpha"] = r.alpha;
  d["rejected"] = r.rejected;
  d["at_boundary"] = r.at_boundary;
  return d;
}

py::list trace(const std::vector<TracePoint>& points) {
  py::list out;
  for (const auto& t : points) out.append(py::make_tuple(t.tau0, t.p, t.rejected));
  return out;
}

}  // namespace

PYBIND11_MODULE(_ribound, m) {
  m.doc() = "Randomization inference for bounded null hypotheses";
  m.attr("__version__") = RIBOUND_VERSION;
  py::register_exception<Error>(m, "RiboundError", PyExc_ValueError);

  m.def(
      "statistic_value",
      [](const std::string& stat, const std::vector<long long>& w, const std::vector<double>& y) {
        const Dataset d = build(w, y, std::nullopt);
        return Statistic::parse(stat).evaluate(d.assignment(), impute_schedule(d, EffectSpec::constant(0.0)));
      },
      py::arg("statistic"), py::arg("w"), py::arg("y"), "Statistic evaluated at the observed assignment.");

  m.def(
      "p_value",
      [](const std::vector<long long>& w, const std::vector<double>& y, const Null& null, const std::string& stat,
         const std::string& tail, const std::optional<std::vector<std::string>>& blocks, const std::string& mode,
         std::uint64_t draws, std::uint64_t seed, bool add_one, const std::string& variant, unsigned threads) {
        const Dataset d = build(w, y, blocks);
        const auto r = p_value(d, effect(null), Statistic::parse(stat), Design::from_dataset(d),
                               mode_of(mode, draws, seed, add_one), parse_tail(tail), RunOptions{threads, false},
                               parse_imputation(variant));
        py::dict out = p_dict(r.p);
        out["observed"] = r.observed;
        return out;
      },
      py::arg("w"), py::arg("y"), py::arg("null") = 0.0, py::arg("statistic") = "diff-means",
      py::arg("tail") = "upper", py::arg("blocks") = py::none(), py::arg("mode") = "exact",
      py::arg("draws") = 10000, py::arg("seed") = 0, py::arg("add_one") = false, py::arg("variant") = "both",
      py::arg("threads") = 0, "Sharp-null randomization p-value.");

  m.def(
      "test_bounded",
      [](const std::vector<long long>& w, const std::vector<double>& y, const Null& null, const std::string& stat,
         const std::string& direction, double alpha, const std::optional<std::vector<std::string>>& blocks,
         const std::string& mode, std::uint64_t draws, std::uint64_t seed, bool add_one, unsigned threads) {
        const Dataset d = build(w, y, blocks);
        return bounded_dict(test_bounded(d, effect(null), Statistic::parse(stat), Design::from_dataset(d),
                                         parse_direction(direction), alpha, mode_of(mode, draws, seed, add_one),
                                         RunOptions{threads, false}));
      },
      py::arg("w"), py::arg("y"), py::arg("null") = 0.0, py::arg("statistic") = "diff-means",
      py::arg("direction") = "non-superiority", py::arg("alpha") = 0.05, py::arg("blocks") = py::none(),
      py::arg("mode") = "exact", py::arg("draws") = 10000, py::arg("seed") = 0, py::arg("add_one") = false,
      py::arg("threads") = 0, "Test of a bounded null on unit-level effects.");

  m.def(
      "confidence_bound",
      [](const std::vector<long long>& w, const std::vector<double>& y, const std::string& stat,
         const std::string& target, double alpha, std::optional<std::pair<double, double>> outcome_range,
         const std::optional<std::vector<std::string>>& blocks, const std::string& mode, std::uint64_t draws,
         std::uint64_t seed, std::size_t grid_points, double tolerance, unsigned threads) {
        const Dataset d = build(w, y, blocks);
        GridConfig grid;
        grid.points = grid_points;
        grid.relative_tolerance = tolerance;
        grid.outcome_range = outcome_range;
        const auto r = invert_ci(d, Statistic::parse(stat), Design::from_dataset(d), parse_target(target), alpha,
                                 mode_of(mode, draws, seed, false), grid, RunOptions{threads, false});
        py::dict out;
        out["target"] = to_string(r.target);
        out["alpha"] = r.alpha;
        out["bound"] = r.bound;
        out["outer"] = r.outer;
        out["tolerance"] = r.tolerance;
        out["grid"] = trace(r.grid);
        out["bisection"] = trace(r.bisection);
        return out;
      },
      py::arg("w"), py::arg("y"), py::arg("statistic") = "diff-means", py::arg("target") = "max",
      py::arg("alpha") = 0.10, py::arg("outcome_range") = py::none(), py::arg("blocks") = py::none(),
      py::arg("mode") = "exact", py::arg("draws") = 10000, py::arg("seed") = 0, py::arg("grid_points") = 101,
      py::arg("tolerance") = 1e-4, py::arg("threads") = 0,
      "One-sided bound on the largest or smallest unit-level effect.");

  m.def(
      "test_simultaneous",
      [](const std::vector<long long>& w, const std::vector<double>& y, const std::string& stat,
         const std::optional<std::vector<std::string>>& blocks, const std::string& mode, std::uint64_t draws,
         std::uint64_t seed, unsigned threads) {
        const Dataset d = build(w, y, blocks);
        const auto r = test_simultaneous(d, Statistic::parse(stat), Design::from_dataset(d),
                                         mode_of(mode, draws, seed, false), RunOptions{threads, false});
        py::dict out;
        out["statistic"] = r.statistic;
        out["p_up"] = p_dict(r.p_up);
        out["p_down"] = p_dict(r.p_down);
        out["p_iu"] = r.p_iu;
        return out;
      },
      py::arg("w"), py::arg("y"), py::arg("statistic") = "diff-means", py::arg("blocks") = py::none(),
      py::arg("mode") = "exact", py::arg("draws") = 10000, py::arg("seed") = 0, py::arg("threads") = 0,
      "Intersection-union test for effects of both signs.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation; returns (exit_code, stdout, stderr).");
}
