#include "ribound/infer.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

namespace ribound {

Direction parse_direction(std::string_view text) {
  if (text == "non-superiority") return Direction::NonSuperiority;
  if (text == "non-inferiority") return Direction::NonInferiority;
  throw Error(Errc::InvalidArgument,
              "unknown direction '" + std::string(text) + "' (expected non-superiority or non-inferiority)");
}

const char* to_string(Direction d) noexcept {
  return d == Direction::NonSuperiority ? "non-superiority" : "non-inferiority";
}

Tail tail_for(Direction d) noexcept { return d == Direction::NonSuperiority ? Tail::Upper : Tail::Lower; }

Target parse_target(std::string_view text) {
  if (text == "max") return Target::MaxEffect;
  if (text == "min") return Target::MinEffect;
  throw Error(Errc::InvalidArgument, "unknown target '" + std::string(text) + "' (expected max or min)");
}

const char* to_string(Target t) noexcept { return t == Target::MaxEffect ? "max" : "min"; }

InstrumentEffect parse_instrument_effect(std::string_view text) {
  if (text == "increases") return InstrumentEffect::Increases;
  if (text == "decreases") return InstrumentEffect::Decreases;
  throw Error(Errc::InvalidArgument,
              "unknown instrument effect '" + std::string(text) + "' (expected increases or decreases)");
}

namespace {

void require_effect_increasing(const Statistic& stat) {
  if (!stat.effect_increasing())
    throw Error(Errc::NonEIStatistic,
                stat.name() + " is not effect-increasing; bounded-null validity needs an effect-increasing statistic");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
}

}  // namespace

BoundedTestResult test_bounded(const Dataset& d, const EffectSpec& bound, const Statistic& stat,
                               const Design& design, Direction direction, double alpha, const Mode& mode,
                               const RunOptions& options) {
  require_effect_increasing(stat);
  require_alpha(alpha);
  const PValueResult r = p_value(d, bound, stat, design, mode, tail_for(direction), options);
  BoundedTestResult out;
  out.direction = direction;
  out.bound = bound;
  out.statistic = stat.name();
  out.observed = r.observed;
  out.p = r.p;
  out.alpha = alpha;
  out.rejected = r.p.p <= alpha;
  out.at_boundary = r.p.p == alpha;
  return out;
}

double outer_limit(const Dataset& d, Target target, std::pair<double, double> outcome_range) {
  const auto [lo, hi] = outcome_range;
  if (!(lo < hi)) throw Error(Errc::InvalidArgument, "outcome range needs lo < hi");
  double best = target == Target::MaxEffect ? -std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::infinity();
  for (const Unit& u : d.units()) {
    if (u.y < lo || u.y > hi) throw Error(Errc::InvalidArgument, "unit '" + u.id + "' lies outside the declared outcome range");
    double extreme;
    if (target == Target::MaxEffect)
      extreme = u.w ? u.y - lo : hi - u.y;
    else
      extreme = u.w ? u.y - hi : lo - u.y;
    best = target == Target::MaxEffect ? std::max(best, extreme) : std::min(best, extreme);
  }
  return best;
}

CIResult invert_ci(const Dataset& d, const Statistic& stat, const Design& design, Target target, double alpha,
                   const Mode& mode, const GridConfig& grid, const RunOptions& options) {
  require_effect_increasing(stat);
  require_alpha(alpha);
  if (grid.points < 2) throw Error(Errc::InvalidArgument, "grid needs at least two points");

  // Search coordinate u with p non-decreasing in u. MaxEffect: tau0 = u with
  // the upper tail. MinEffect: tau0 = -u with the lower tail, laid out exactly
  // as the MaxEffect search on the negated outcomes.
  const bool max_target = target == Target::MaxEffect;
  const double sign = max_target ? 1.0 : -1.0;
  const Tail tail = max_target ? Tail::Upper : Tail::Lower;

  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const Unit& u : d.units()) {
    const double y = max_target ? u.y : -u.y;
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  double range = y_max - y_min;
  if (range == 0.0) range = std::max(1.0, std::fabs(y_max));

  auto p_at = [&](double u) {
    return p_value(d, EffectSpec::constant(sign * u), stat, design, mode, tail, options).p.p;
  };
  auto point = [&](double u, double p) { return TracePoint{sign * u, p, p <= alpha}; };

  CIResult out;
  out.target = target;
  out.alpha = alpha;
  out.tolerance = grid.relative_tolerance * range;
  if (grid.outcome_range) out.outer = outer_limit(d, target, *grid.outcome_range);
  else out.outer = max_target ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();

  const double lo = y_min - range;
  const double hi = y_max + range;
  const double step = (hi - lo) / static_cast<double>(grid.points - 1);
  std::vector<double> us(grid.points);
  std::vector<double> ps(grid.points);
  for (std::size_t k = 0; k < grid.points; ++k) {
    us[k] = k + 1 == grid.points ? hi : lo + static_cast<double>(k) * step;
    ps[k] = p_at(us[k]);
    out.grid.push_back(point(us[k], ps[k]));
    if (k > 0 && ps[k] < ps[k - 1])
      throw Error(Errc::NonMonotonePValue, "p-value decreases between shifts " + std::to_string(sign * us[k - 1]) +
                                               " and " + std::to_string(sign * us[k]));
  }

  const auto first_accept = std::find_if(ps.begin(), ps.end(), [&](double p) { return p > alpha; });
  double rejected_u = 0.0;
  double accepted_u = 0.0;
  const double width = hi - lo;

  if (first_accept == ps.end()) {
    // every grid shift rejected: search upward for an accepted one
    rejected_u = hi;
    bool found = false;
    for (std::size_t j = 0; j < grid.max_expansions && !found; ++j) {
      const double u = hi + width * std::ldexp(1.0, static_cast<int>(j));
      const double p = p_at(u);
      out.bisection.push_back(point(u, p));
      if (p > alpha) {
        accepted_u = u;
        found = true;
      } else {
        rejected_u = u;
      }
    }
    if (!found) {
      out.bound = sign * std::numeric_limits<double>::infinity();
      return out;
    }
  } else if (first_accept == ps.begin()) {
    // every grid shift accepted: search downward for a rejected one
    accepted_u = lo;
    bool found = false;
    for (std::size_t j = 0; j < grid.max_expansions && !found; ++j) {
      const double u = lo - width * std::ldexp(1.0, static_cast<int>(j));
      const double p = p_at(u);
      out.bisection.push_back(point(u, p));
      if (p <= alpha) {
        rejected_u = u;
        found = true;
      } else {
        accepted_u = u;
      }
    }
    if (!found) {
      out.bound = -sign * std::numeric_limits<double>::infinity();
      return out;
    }
  } else {
    const auto k = static_cast<std::size_t>(first_accept - ps.begin());
    rejected_u = us[k - 1];
    accepted_u = us[k];
  }

  while (accepted_u - rejected_u > out.tolerance) {
    const double mid = 0.5 * (rejected_u + accepted_u);
    if (mid <= rejected_u || mid >= accepted_u) break;
    const double p = p_at(mid);
    out.bisection.push_back(point(mid, p));
    if (p > alpha)
      accepted_u = mid;
    else
      rejected_u = mid;
  }
  out.bound = sign * rejected_u;
  return out;
}

SimultaneousResult test_simultaneous(const Dataset& d, const Statistic& stat, const Design& design,
                                     const Mode& mode, const RunOptions& options) {
  require_effect_increasing(stat);
  const EffectSpec zero = EffectSpec::constant(0.0);
  SimultaneousResult out;
  out.statistic = stat.name();
  out.p_up = p_value(d, zero, stat, design, mode, Tail::Upper, options).p;
  out.p_down = p_value(d, zero, stat, design, mode, Tail::Lower, options).p;
  out.p_iu = std::max(out.p_up.p, out.p_down.p);
  return out;
}

BoundedTestResult test_monotonicity(const Dataset& d, const Statistic& stat, const Design& design,
                                    InstrumentEffect effect, double alpha, const Mode& mode,
                                    const RunOptions& options) {
  // An instrument that raises uptake for everyone satisfies tau_i >= 0.
  const Direction direction =
      effect == InstrumentEffect::Increases ? Direction::NonInferiority : Direction::NonSuperiority;
  return test_bounded(d, EffectSpec::constant(0.0), stat, design, direction, alpha, mode, options);
}

}  // namespace ribound
