#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ribound/cli.hpp"
#include "ribound/infer.hpp"
#include "ribound/oracle.hpp"
#include "ribound/sim.hpp"

namespace ribound::cli {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json to_json(const PValue& p) {
  return {{"p", num(p.p)}, {"count", p.count}, {"total", p.total}, {"tail", to_string(p.tail)}, {"exact", p.exact}};
}

json to_json(const TracePoint& t) { return {{"tau0", num(t.tau0)}, {"p", num(t.p)}, {"rejected", t.rejected}}; }

json to_json(const std::vector<TracePoint>& trace) {
  json a = json::array();
  for (const auto& t : trace) a.push_back(to_json(t));
  return a;
}

json to_json(const Schedule& s) {
  json y0 = json::array(), y1 = json::array();
  for (double v : s.y0) y0.push_back(num(v));
  for (double v : s.y1) y1.push_back(num(v));
  return {{"y0", y0}, {"y1", y1}};
}

json to_json(const oracle::OracleReport& r) {
  json j = {{"description", r.description}, {"optimized", num(r.optimized)}, {"oracle", num(r.oracle)},
            {"agree", r.agree},             {"discrepancy", num(r.discrepancy)}, {"cases", r.cases},
            {"violations", r.violations},   {"witness", nullptr}};
  if (r.witness) {
    json w = json::array();
    for (auto v : r.witness->w) w.push_back(static_cast<int>(v));
    j["witness"] = {{"lower", to_json(r.witness->lower)},
                    {"upper", to_json(r.witness->upper)},
                    {"w", w},
                    {"t_lower", num(r.witness->t_lower)},
                    {"t_upper", num(r.witness->t_upper)}};
  }
  return j;
}

json to_json(const sim::SimulationReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json x = {{"label", e.label},
              {"alpha", e.alpha},
              {"hits", e.hits},
              {"replications", e.replications},
              {"rate", num(e.rate)},
              {"standard_error", num(e.standard_error)}};
    if (e.median_bound) x["median_bound"] = num(*e.median_bound);
    entries.push_back(x);
  }
  return {{"kind", sim::to_string(r.kind)}, {"entries", entries}, {"metadata", r.metadata}};
}

// Options shared by the data-driven subcommands.
struct DataOptions {
  std::string input;
  ColumnMapping columns;
  std::string block_col;
  std::string design = "auto";
  std::string stat = "diff-means";
  std::string mode = "exact";
  std::uint64_t draws = 10'000;
  std::uint64_t seed = 1;
  bool add_one = false;
  std::uint64_t cap = kDefaultEnumerationCap;
  unsigned threads = 0;
  std::string output;

  CLI::Option* draws_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* add_one_opt = nullptr;
  CLI::Option* cap_opt = nullptr;
};

void add_data_options(CLI::App* app, DataOptions& o) {
  app->add_option("--input,-i", o.input, "CSV file with a header row")->required();
  app->add_option("--id-col", o.columns.id, "unit id column")->capture_default_str();
  app->add_option("--w-col", o.columns.w, "treatment column (0/1)")->capture_default_str();
  app->add_option("--y-col", o.columns.y, "outcome column")->capture_default_str();
  app->add_option("--block-col", o.block_col, "pair/block column (default: 'block' when present)");
  app->add_option("--design", o.design, "auto | complete | paired")
      ->check(CLI::IsMember({"auto", "complete", "paired"}))
      ->capture_default_str();
  app->add_option("--stat", o.stat, "diff-means | rank-sum | stephenson:S | threshold:C | welch-t")
      ->capture_default_str();
  app->add_option("--mode", o.mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}))->capture_default_str();
  o.draws_opt = app->add_option("--draws", o.draws, "Monte Carlo draws (mc only)")->capture_default_str();
  o.seed_opt = app->add_option("--seed", o.seed, "Monte Carlo seed (mc only)")->capture_default_str();
  o.add_one_opt = app->add_flag("--mc-add-one", o.add_one, "report (1 + count) / (1 + draws) (mc only)");
  o.cap_opt = app->add_option("--cap", o.cap, "largest exact enumeration allowed (exact only)")->capture_default_str();
  app->add_option("--threads", o.threads, "worker threads, 0 = all available")->capture_default_str();
  app->add_option("--output,-o", o.output, "write JSON here instead of stdout");
}

Mode resolve_mode(const DataOptions& o) {
  if (o.mode == "exact") {
    if (o.draws_opt->count() || o.seed_opt->count() || o.add_one_opt->count())
      throw Error(Errc::InvalidArgument, "--draws, --seed and --mc-add-one need --mode mc");
    return ExactMode{o.cap};
  }
  if (o.cap_opt->count()) throw Error(Errc::InvalidArgument, "--cap applies to --mode exact only");
  if (o.draws < 1) throw Error(Errc::InvalidArgument, "--draws must be >= 1");
  return MonteCarloMode{o.seed, o.draws, o.add_one};
}

json mode_json(const Mode& m) {
  if (const auto* e = std::get_if<ExactMode>(&m)) return {{"kind", "exact"}, {"cap", e->cap}};
  const auto& mc = std::get<MonteCarloMode>(m);
  return {{"kind", "mc"}, {"draws", mc.draws}, {"seed", mc.seed}, {"add_one", mc.add_one}};
}

Design resolve_design(const DataOptions& o, const Dataset& d) {
  if (o.design == "complete") return Design::complete(d.size(), d.n_treated());
  if (o.design == "paired" && !d.has_blocks())
    throw Error(Errc::MissingBlock, "--design paired needs a block column");
  return Design::from_dataset(d);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "--alpha must lie in (0, 1)");
}

struct Loaded {
  CsvTable table;
  Dataset data;
  Design design = Design::complete(2, 1);
  Statistic stat = Statistic::diff_means();
  Mode mode;
  json config;
};

Loaded load(const DataOptions& o) {
  Loaded l;
  l.mode = resolve_mode(o);
  l.stat = Statistic::parse(o.stat);
  ColumnMapping cols = o.columns;
  if (!o.block_col.empty()) cols.block = o.block_col;
  l.table = read_csv(o.input);
  l.data = to_dataset(l.table, cols);
  l.design = resolve_design(o, l.data);
  l.config = {{"input", o.input},
              {"columns", {{"id", cols.id}, {"w", cols.w}, {"y", cols.y}, {"block", cols.block ? json(*cols.block) : json(nullptr)}}},
              {"design", l.design.describe()},
              {"statistic", l.stat.name()},
              {"mode", mode_json(l.mode)}};
  return l;
}

void emit(const std::string& path, std::ostream& out, const json& envelope) {
  const std::string text = envelope.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(Errc::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

json envelope(const std::string& command, json config, json result, double ms, unsigned threads) {
  return {{"schema_version", kSchemaVersion},
          {"version", RIBOUND_VERSION},
          {"command", command},
          {"config", std::move(config)},
          {"result", std::move(result)},
          {"runtime", {{"timing_ms", ms}, {"threads", threads}}}};
}

constexpr const char* kTestExamples = R"(Examples:
  ribound test --input data/example16.csv --stat diff-means --null 0 --direction non-superiority --mode exact
  ribound test --input data/example16.csv --null-col tau_bound --impute control-baseline
  ribound test --input data/example16.csv --stat rank-sum --tail upper --export-dist dist.csv
  ribound test --input data/example16.csv --mode mc --draws 20000 --seed 7 --mc-add-one)";
constexpr const char* kCiExamples = R"(Examples:
  ribound ci --input data/paired8.csv --target max --alpha 0.10 --stat stephenson:6 --mode exact
  ribound ci --input data/example16.csv --target min --alpha 0.20 --range-lo -5 --range-hi 5)";
constexpr const char* kSimultaneousExamples = R"(Examples:
  ribound simultaneous --input data/paired8.csv --stat diff-means)";
constexpr const char* kMonotonicityExamples = R"(Examples:
  ribound monotonicity --input data/example16.csv --instrument increases --stat threshold:0.5)";
constexpr const char* kSimExamples = R"(Examples:
  ribound sim --scenario data/scenarios/conservativeness.txt
  ribound sim --kind ttest-failure --replications 500 --seed 3)";
constexpr const char* kOracleExamples = R"(Examples:
  ribound oracle --check stephenson --trials 200
  ribound oracle --check p-values --trials 100 --seed 5
  ribound oracle --check ei --stat welch-t --n 8 --trials 200)";

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact randomization inference for bounded null hypotheses", "ribound"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RIBOUND_VERSION);

  DataOptions data;

  // test
  auto* test = app.add_subcommand("test", "sharp or bounded null test of unit-level effects");
  add_data_options(test, data);
  double null_value = 0.0;
  std::string null_col;
  std::string direction;
  std::string tail;
  std::string impute = "both";
  std::string export_dist;
  double test_alpha = 0.05;
  auto* null_opt = test->add_option("--null", null_value, "constant bound tau0")->capture_default_str();
  test->add_option("--null-col", null_col, "column holding a per-unit bound")->excludes(null_opt);
  auto* dir_opt = test->add_option("--direction", direction, "non-superiority | non-inferiority")
                      ->check(CLI::IsMember({"non-superiority", "non-inferiority"}));
  test->add_option("--tail", tail, "sharp-null test in this tail (upper | lower)")
      ->check(CLI::IsMember({"upper", "lower"}))
      ->excludes(dir_opt);
  test->add_option("--impute", impute, "both | control-baseline | treated-baseline")
      ->check(CLI::IsMember({"both", "control-baseline", "treated-baseline"}))
      ->capture_default_str();
  test->add_option("--alpha", test_alpha, "significance level")->capture_default_str();
  test->add_option("--export-dist", export_dist, "write the reference distribution as value,count CSV");
  test->footer(kTestExamples);

  // ci
  auto* ci = app.add_subcommand("ci", "one-sided interval for the largest or smallest unit effect");
  DataOptions ci_data;
  add_data_options(ci, ci_data);
  std::string target = "max";
  double ci_alpha = 0.10;
  std::optional<double> range_lo, range_hi;
  std::size_t grid_points = 101;
  double tolerance = 1e-4;
  ci->add_option("--target", target, "max | min")->check(CLI::IsMember({"max", "min"}))->capture_default_str();
  ci->add_option("--alpha", ci_alpha, "one minus the confidence level")->capture_default_str();
  auto* lo_opt = ci->add_option("--range-lo", range_lo, "declared lower outcome limit");
  auto* hi_opt = ci->add_option("--range-hi", range_hi, "declared upper outcome limit");
  lo_opt->needs(hi_opt);
  hi_opt->needs(lo_opt);
  ci->add_option("--grid-points", grid_points, "coarse grid size")->capture_default_str();
  ci->add_option("--tolerance", tolerance, "bisection tolerance relative to the outcome range")->capture_default_str();
  ci->footer(kCiExamples);

  // simultaneous
  auto* simult = app.add_subcommand("simultaneous", "intersection-union test of effects of both signs");
  DataOptions sim_data;
  add_data_options(simult, sim_data);
  double simult_alpha = 0.05;
  simult->add_option("--alpha", simult_alpha, "significance level")->capture_default_str();
  simult->footer(kSimultaneousExamples);

  // monotonicity
  auto* mono = app.add_subcommand("monotonicity", "test of instrument monotonicity (w = instrument, y = uptake)");
  DataOptions mono_data;
  add_data_options(mono, mono_data);
  std::string instrument = "increases";
  double mono_alpha = 0.05;
  mono->add_option("--instrument", instrument, "increases | decreases")
      ->check(CLI::IsMember({"increases", "decreases"}))
      ->capture_default_str();
  mono->add_option("--alpha", mono_alpha, "significance level")->capture_default_str();
  mono->footer(kMonotonicityExamples);

  // sim
  auto* simc = app.add_subcommand("sim", "simulation studies");
  std::string scenario_path, kind;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> sim_seed;
  std::optional<unsigned> sim_threads;
  std::string sim_output;
  auto* scen_opt = simc->add_option("--scenario", scenario_path, "key = value scenario file");
  simc->add_option("--kind", kind, "ttest-failure | conservativeness | ci-coverage (defaults)")
      ->check(CLI::IsMember({"ttest-failure", "conservativeness", "ci-coverage"}))
      ->excludes(scen_opt);
  simc->add_option("--replications", replications, "override replications");
  simc->add_option("--seed", sim_seed, "override seed");
  simc->add_option("--threads", sim_threads, "override worker threads");
  simc->add_option("--output,-o", sim_output, "write JSON here instead of stdout");
  simc->footer(kSimExamples);

  // oracle
  auto* orc = app.add_subcommand("oracle", "differential checks against brute-force references");
  std::string check = "stephenson";
  std::size_t trials = 100;
  std::uint64_t oracle_seed = 1;
  std::string oracle_stat = "diff-means";
  std::size_t ei_n = 8;
  std::size_t max_n = 12, max_subset = 6;
  bool no_ties = false;
  std::string oracle_output;
  orc->add_option("--check", check, "stephenson | p-values | ei")
      ->check(CLI::IsMember({"stephenson", "p-values", "ei"}))
      ->capture_default_str();
  orc->add_option("--trials", trials, "random cases")->capture_default_str();
  orc->add_option("--seed", oracle_seed, "seed")->capture_default_str();
  orc->add_option("--stat", oracle_stat, "statistic for --check ei")->capture_default_str();
  orc->add_option("--n", ei_n, "units for --check ei (half treated)")->capture_default_str();
  orc->add_option("--max-n", max_n, "largest n for --check stephenson")->capture_default_str();
  orc->add_option("--max-subset", max_subset, "largest s for --check stephenson")->capture_default_str();
  orc->add_flag("--no-ties", no_ties, "do not inject ties in --check ei");
  orc->add_option("--output,-o", oracle_output, "write JSON here instead of stdout");
  orc->footer(kOracleExamples);

  std::vector<std::string> args(args_in.rbegin(), args_in.rend());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  try {
    if (test->parsed()) {
      check_alpha(test_alpha);
      Loaded l = load(data);
      const ImputationVariant variant = parse_imputation(impute);
      EffectSpec bound = null_col.empty() ? EffectSpec::constant(null_value)
                                          : EffectSpec::per_unit(numeric_column(l.table, null_col));
      const bool bounded = tail.empty();
      const Direction dir = direction.empty() ? Direction::NonSuperiority : parse_direction(direction);
      const Tail t = bounded ? tail_for(dir) : parse_tail(tail);
      if (bounded && !l.stat.effect_increasing())
        throw Error(Errc::NonEIStatistic, l.stat.name() +
                                              " is not effect-increasing; bounded nulls need an effect-increasing "
                                              "statistic (use --tail for a sharp-null test)");
      const RunOptions opts{data.threads, !export_dist.empty()};
      const PValueResult r = p_value(l.data, bound, l.stat, l.design, l.mode, t, opts, variant);
      if (!export_dist.empty()) {
        std::ofstream f(export_dist);
        if (!f) throw Error(Errc::InvalidArgument, "cannot write '" + export_dist + "'");
        write_distribution_csv(f, r.distribution);
      }
      json config = l.config;
      config["null"] = null_col.empty() ? json{{"kind", "constant"}, {"value", null_value}}
                                        : json{{"kind", "per-unit"}, {"column", null_col}};
      config["hypothesis"] = bounded ? to_string(dir) : "sharp";
      config["tail"] = to_string(t);
      config["imputation"] = to_string(variant);
      config["alpha"] = test_alpha;
      config["export_dist"] = export_dist.empty() ? json(nullptr) : json(export_dist);
      json result = {{"statistic", l.stat.name()},
                     {"observed", num(r.observed)},
                     {"p", num(r.p.p)},
                     {"p_value", to_json(r.p)},
                     {"alpha", test_alpha},
                     {"rejected", r.p.p <= test_alpha},
                     {"at_boundary", r.p.p == test_alpha},
                     {"reference_size", r.distribution.size}};
      emit(data.output, out, envelope("test", config, result, elapsed_ms(), data.threads));
    } else if (ci->parsed()) {
      check_alpha(ci_alpha);
      Loaded l = load(ci_data);
      GridConfig grid;
      grid.points = grid_points;
      grid.relative_tolerance = tolerance;
      if (range_lo && range_hi) grid.outcome_range = std::make_pair(*range_lo, *range_hi);
      const Target tg = parse_target(target);
      const CIResult r = invert_ci(l.data, l.stat, l.design, tg, ci_alpha, l.mode, grid, RunOptions{ci_data.threads});
      json config = l.config;
      config["target"] = to_string(tg);
      config["alpha"] = ci_alpha;
      config["grid_points"] = grid_points;
      config["relative_tolerance"] = tolerance;
      config["outcome_range"] = grid.outcome_range ? json::array({*range_lo, *range_hi}) : json(nullptr);
      const json interval = tg == Target::MaxEffect ? json::array({num(r.bound), num(r.outer)})
                                                    : json::array({num(r.outer), num(r.bound)});
      json result = {{"target", to_string(tg)},
                     {"alpha", ci_alpha},
                     {"bound", num(r.bound)},
                     {"outer", num(r.outer)},
                     {"interval", interval},
                     {"tolerance", num(r.tolerance)},
                     {"trace", {{"grid", to_json(r.grid)}, {"bisection", to_json(r.bisection)}}}};
      emit(ci_data.output, out, envelope("ci", config, result, elapsed_ms(), ci_data.threads));
    } else if (simult->parsed()) {
      check_alpha(simult_alpha);
      Loaded l = load(sim_data);
      const SimultaneousResult r = test_simultaneous(l.data, l.stat, l.design, l.mode, RunOptions{sim_data.threads});
      json config = l.config;
      config["alpha"] = simult_alpha;
      json result = {{"statistic", r.statistic},
                     {"p_up", to_json(r.p_up)},
                     {"p_down", to_json(r.p_down)},
                     {"p_iu", num(r.p_iu)},
                     {"alpha", simult_alpha},
                     {"rejected", r.p_iu <= simult_alpha}};
      emit(sim_data.output, out, envelope("simultaneous", config, result, elapsed_ms(), sim_data.threads));
    } else if (mono->parsed()) {
      check_alpha(mono_alpha);
      Loaded l = load(mono_data);
      const InstrumentEffect eff = parse_instrument_effect(instrument);
      const BoundedTestResult r =
          test_monotonicity(l.data, l.stat, l.design, eff, mono_alpha, l.mode, RunOptions{mono_data.threads});
      json config = l.config;
      config["instrument"] = instrument;
      config["alpha"] = mono_alpha;
      json result = {{"statistic", r.statistic},
                     {"hypothesis", to_string(r.direction)},
                     {"observed", num(r.observed)},
                     {"p", num(r.p.p)},
                     {"p_value", to_json(r.p)},
                     {"alpha", r.alpha},
                     {"rejected", r.rejected},
                     {"at_boundary", r.at_boundary}};
      emit(mono_data.output, out, envelope("monotonicity", config, result, elapsed_ms(), mono_data.threads));
    } else if (simc->parsed()) {
      sim::Scenario s;
      if (!scenario_path.empty()) {
        std::ifstream f(scenario_path);
        if (!f) throw Error(Errc::FileNotFound, "cannot open '" + scenario_path + "'");
        s = sim::parse_scenario(f);
      } else if (!kind.empty()) {
        s = sim::default_scenario(sim::parse_kind(kind));
      } else {
        throw Error(Errc::InvalidArgument, "sim needs --scenario or --kind");
      }
      if (replications) s.replications = *replications;
      if (sim_seed) s.seed = *sim_seed;
      if (sim_threads) s.threads = *sim_threads;
      sim::validate(s);
      const sim::SimulationReport r = sim::run(s);
      json stats = json::array();
      for (const auto& st : s.statistics) stats.push_back(st.name());
      json config = {{"scenario", scenario_path.empty() ? json(nullptr) : json(scenario_path)},
                     {"kind", sim::to_string(s.kind)},
                     {"outcome", s.outcome.describe()},
                     {"effect", s.effect.describe()},
                     {"n_treated", s.n_treated},
                     {"n_control", s.n_control},
                     {"statistics", stats},
                     {"alphas", s.alphas},
                     {"null", s.null_bound},
                     {"replications", s.replications},
                     {"seed", s.seed},
                     {"mode", mode_json(s.mode)},
                     {"permutation_draws", s.permutation_draws}};
      emit(sim_output, out, envelope("sim", config, to_json(r), elapsed_ms(), s.threads));
    } else if (orc->parsed()) {
      oracle::OracleReport r;
      json config = {{"check", check}, {"trials", trials}, {"seed", oracle_seed}};
      if (check == "stephenson") {
        r = oracle::check_stephenson(trials, max_n, max_subset, oracle_seed);
        config["max_n"] = max_n;
        config["max_subset"] = max_subset;
      } else if (check == "p-values") {
        r = oracle::check_p_values(trials, oracle_seed);
      } else {
        const Statistic st = Statistic::parse(oracle_stat);
        if (ei_n < 2) throw Error(Errc::InvalidArgument, "--n must be >= 2");
        r = oracle::ei_property_check(st, trials, Design::complete(ei_n, ei_n / 2), oracle_seed, !no_ties);
        config["statistic"] = st.name();
        config["n"] = ei_n;
        config["ties"] = !no_ties;
      }
      emit(oracle_output, out, envelope("oracle", config, to_json(r), elapsed_ms(), 1));
    }
    return kOk;
  } catch (const Error& e) {
    err << json{{"error", {{"code", std::string(to_string(e.code())).c_str()}, {"message", e.what()}}}}.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
    return kComputation;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace ribound::cli
