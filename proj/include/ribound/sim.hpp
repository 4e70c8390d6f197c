#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ribound/infer.hpp"
#include "ribound/random.hpp"

namespace ribound::sim {

enum class ScenarioKind { TTestFailure, Conservativeness, CiCoverage };

ScenarioKind parse_kind(std::string_view text);
const char* to_string(ScenarioKind k) noexcept;

/// Control potential outcomes (or all outcomes when there is no effect) are
/// drawn i.i.d. from this family.
struct OutcomeFamily {
  enum class Kind { Beta, Normal, Uniform } kind = Kind::Normal;
  double a = 0.0;  // beta: shape1, normal: mean, uniform: lo
  double b = 1.0;  // beta: shape2, normal: sd,   uniform: hi

  double draw(random::Stream& rng) const;
  double mean() const;
  double variance() const;
  std::string describe() const;
};

/// Unit-level effect generator.
///  constant c        every tau_i = c
///  uniform lo hi     tau_i ~ U(lo, hi)
///  pocket k size base  k randomly chosen units get base + size, the rest base
struct EffectModel {
  enum class Kind { Constant, Uniform, Pocket } kind = Kind::Constant;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  std::vector<double> draw(random::Stream& rng, std::size_t n) const;
  std::string describe() const;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Conservativeness;
  OutcomeFamily outcome;
  EffectModel effect;
  std::size_t n_treated = 8;
  std::size_t n_control = 8;
  std::vector<Statistic> statistics{Statistic::diff_means()};
  std::vector<double> alphas{0.05};
  /// Constant bound tested (conservativeness) .
  double null_bound = 0.0;
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  Mode mode = ExactMode{};
  /// Monte Carlo draws for the permutation comparator in TTestFailure.
  std::uint64_t permutation_draws = 999;
  unsigned threads = 1;
  std::map<std::string, std::string> metadata;
};

/// Errors: DegenerateScenario, InvalidArgument.
void validate(const Scenario& s);

/// Key-value scenario text: one `key = value` per line, `#` starts a comment.
/// Keys: kind, outcome, effect, n_treated, n_control, statistics, alpha,
/// null, replications, seed, mode, draws, permutation_draws, threads.
Scenario parse_scenario(std::istream& in);
Scenario default_scenario(ScenarioKind kind);

struct RateEntry {
  std::string label;
  double alpha = 0.05;
  std::uint64_t hits = 0;
  std::uint64_t replications = 0;
  double rate = 0.0;
  double standard_error = 0.0;
  /// CI coverage only: median of the reported bound across replications.
  std::optional<double> median_bound;
};

struct SimulationReport {
  ScenarioKind kind = ScenarioKind::Conservativeness;
  std::vector<RateEntry> entries;
  std::map<std::string, std::string> metadata;

  const RateEntry* find(std::string_view label, double alpha) const;
};

/// Two-sided Welch test p-value with Welch-Satterthwaite degrees of freedom.
double welch_two_sided_p(AssignmentView w, std::span<const double> y);

/// Welch-t rejection rates for data drawn under identical distributions, with
/// a Monte Carlo permutation diff-means comparator on the same draws.
SimulationReport run_ttest_failure(const Scenario& s);
/// Bounded-null rejection rates of exact tests at the configured bound.
SimulationReport run_conservativeness(const Scenario& s);
/// Fraction of replications whose max-effect lower bound sits at or below
/// the true largest effect.
SimulationReport run_ci_coverage(const Scenario& s);
SimulationReport run(const Scenario& s);

}  // namespace ribound::sim
