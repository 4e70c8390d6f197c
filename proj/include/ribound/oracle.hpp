#pragma once

// Brute-force reference implementations. Nothing here calls into the
// optimized statistic, enumeration, or imputation code it is used to check,
// except where a check explicitly targets that code.

#include <cstdint>
#include <optional>
#include <string>

#include "ribound/core.hpp"
#include "ribound/refdist.hpp"
#include "ribound/stats.hpp"

namespace ribound::oracle {

/// Counts size-s index subsets in which some treated unit is (tied for) the
/// largest realized outcome. Errors: TooLargeForOracle (n > 20).
std::uint64_t stephenson_subset_count(AssignmentView w, const Schedule& s, std::size_t subset_size);

/// Mid-ranks by direct counting: rank_i = #{y_j < y_i} + (#{y_j == y_i} + 1) / 2.
std::vector<double> brute_mid_ranks(std::span<const double> values);

/// Mann-Whitney pair count: sum over treated i, control j of 1{y_i > y_j} + 1/2 1{y_i == y_j}.
double mann_whitney(AssignmentView w, std::span<const double> realized);

/// Statistic recomputed from scratch on realized outcomes.
double naive_statistic(const Statistic& stat, AssignmentView w, const Schedule& s);

/// Exact p-value by naive recursion over assignments, naive imputation, and
/// naive statistics. Errors: TooLargeForOracle beyond 10^6 assignments.
PValue exhaustive_p(const Dataset& d, const EffectSpec& e, const Statistic& stat, const Design& design,
                    Tail tail = Tail::Upper);

struct EiWitness {
  Schedule lower;  // lower <= upper in the schedule ordering
  Schedule upper;
  Assignment w;
  double t_lower = 0.0;
  double t_upper = 0.0;
};

struct OracleReport {
  std::string description;
  double optimized = 0.0;
  double oracle = 0.0;
  bool agree = true;
  double discrepancy = 0.0;
  std::uint64_t cases = 0;
  std::uint64_t violations = 0;
  std::optional<EiWitness> witness;
};

/// Integer-valued statistics must match exactly; others within 1e-10 relative.
bool values_agree(double optimized, double oracle, bool integer_valued) noexcept;

/// Random ordered pairs a <= b (y1 nudged up and/or y0 nudged down) checked
/// over every assignment of the design: T(w, a) <= T(w, b).
OracleReport ei_property_check(const Statistic& stat, std::size_t trials, const Design& design, std::uint64_t seed,
                               bool inject_ties = true);

/// Closed-form Stephenson against stephenson_subset_count on random tied data.
OracleReport check_stephenson(std::size_t trials, std::size_t max_n, std::size_t max_subset, std::uint64_t seed);

/// refdist p_value against exhaustive_p on random small datasets, designs,
/// statistics, nulls, and tails.
OracleReport check_p_values(std::size_t trials, std::uint64_t seed);

}  // namespace ribound::oracle
