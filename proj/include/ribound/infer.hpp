#pragma once

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "ribound/refdist.hpp"

namespace ribound {

/// NonSuperiority: every tau_i <= tau0_i. NonInferiority: every tau_i >= tau0_i.
enum class Direction { NonSuperiority, NonInferiority };

Direction parse_direction(std::string_view text);
const char* to_string(Direction d) noexcept;
/// Tail whose extreme values count as evidence against the bounded null.
Tail tail_for(Direction d) noexcept;

struct BoundedTestResult {
  Direction direction = Direction::NonSuperiority;
  EffectSpec bound = EffectSpec::constant(0.0);
  std::string statistic;
  double observed = 0.0;
  PValue p;
  double alpha = 0.05;
  /// p <= alpha
  bool rejected = false;
  /// p == alpha exactly; reported as a rejection and flagged.
  bool at_boundary = false;
};

/// Sharp-null test on the imputed schedule, read as a test of the bounded
/// null. Errors: NonEIStatistic, plus anything p_value raises.
BoundedTestResult test_bounded(const Dataset& d, const EffectSpec& bound, const Statistic& stat,
                               const Design& design, Direction direction, double alpha, const Mode& mode,
                               const RunOptions& options = {});

enum class Target { MaxEffect, MinEffect };

Target parse_target(std::string_view text);
const char* to_string(Target t) noexcept;

struct GridConfig {
  std::size_t points = 101;
  /// Bisection stops once the bracket is narrower than this times the outcome range.
  double relative_tolerance = 1e-4;
  /// Declared outcome support [lo, hi]; gives a finite outer limit.
  std::optional<std::pair<double, double>> outcome_range;
  /// Doublings allowed when the grid does not bracket the boundary.
  std::size_t max_expansions = 60;
};

struct TracePoint {
  double tau0 = 0.0;
  double p = 1.0;
  bool rejected = false;
};

struct CIResult {
  Target target = Target::MaxEffect;
  double alpha = 0.1;
  /// MaxEffect: lower bound L of [L, outer]. MinEffect: upper bound U of [outer, U].
  /// -inf / +inf when no constant shift on the search path was rejected / accepted.
  double bound = 0.0;
  double outer = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::vector<TracePoint> grid;
  std::vector<TracePoint> bisection;
};

/// One-sided confidence interval for the largest (MaxEffect) or smallest
/// (MinEffect) unit-level effect, by inverting constant-shift bounded tests.
/// The reported bound sits on the rejected side of the boundary, within the
/// tolerance, so the interval covers every non-rejected shift.
/// Errors: NonEIStatistic, NonMonotonePValue.
CIResult invert_ci(const Dataset& d, const Statistic& stat, const Design& design, Target target, double alpha,
                   const Mode& mode, const GridConfig& grid = {}, const RunOptions& options = {});

struct SimultaneousResult {
  std::string statistic;
  PValue p_up;    // non-superiority at 0
  PValue p_down;  // non-inferiority at 0
  double p_iu = 1.0;
};

/// Intersection-union test of "some effect positive and some effect negative".
SimultaneousResult test_simultaneous(const Dataset& d, const Statistic& stat, const Design& design,
                                     const Mode& mode, const RunOptions& options = {});

/// Sign of the instrument's effect on uptake under monotonicity.
enum class InstrumentEffect { Increases, Decreases };

InstrumentEffect parse_instrument_effect(std::string_view text);

/// Monotonicity as a bounded null at zero (w = instrument, y = uptake).
/// Rejection means some unit responds against the assumed direction.
BoundedTestResult test_monotonicity(const Dataset& d, const Statistic& stat, const Design& design,
                                    InstrumentEffect effect, double alpha, const Mode& mode,
                                    const RunOptions& options = {});

/// Largest (MaxEffect) or smallest (MinEffect) effect compatible with the
/// observed data and a declared outcome support [lo, hi].
double outer_limit(const Dataset& d, Target target, std::pair<double, double> outcome_range);

}  // namespace ribound
