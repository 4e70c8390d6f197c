#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ribound/core.hpp"
#include "ribound/impute.hpp"
#include "ribound/stats.hpp"

namespace ribound {

enum class Tail { Upper, Lower };

Tail parse_tail(std::string_view text);
const char* to_string(Tail t) noexcept;

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

struct ExactMode {
  std::uint64_t cap = kDefaultEnumerationCap;
};

/// Draw k of the run is a pure function of (seed, k).
struct MonteCarloMode {
  std::uint64_t seed = 0;
  std::uint64_t draws = 10'000;
  /// Report (1 + count) / (1 + draws) instead of count / draws.
  bool add_one = false;
};

using Mode = std::variant<ExactMode, MonteCarloMode>;

struct RunOptions {
  /// 0 = hardware concurrency.
  unsigned threads = 0;
  /// Keep every reference value (needed for distribution export).
  bool keep_values = false;
};

struct PValue {
  double p = 1.0;
  std::uint64_t count = 0;  // reference values at least as extreme as observed
  std::uint64_t total = 0;  // assignments enumerated or drawn
  Tail tail = Tail::Upper;
  bool exact = true;
};

struct ReferenceDistribution {
  Mode mode;
  std::string design;
  std::uint64_t size = 0;
  /// In enumeration (or draw) order; empty unless RunOptions::keep_values.
  std::vector<double> values;
};

struct PValueResult {
  double observed = 0.0;
  PValue p;
  ReferenceDistribution distribution;
};

// ---------------------------------------------------------------------------

/// Walks every admissible assignment exactly once. Complete randomization
/// yields treated sets in lexicographic order; paired designs count the
/// block mask upward, bit k set meaning the first unit of block k is treated.
class AssignmentEnumerator {
 public:
  /// Errors: EnumerationTooLarge when the space exceeds `cap`.
  AssignmentEnumerator(const Design& design, std::uint64_t cap = kDefaultEnumerationCap);

  std::uint64_t size() const noexcept { return size_; }

  /// Visits assignments with index in [begin, end).
  template <typename F>
  void for_range(std::uint64_t begin, std::uint64_t end, F&& visit) const;

  Assignment at(std::uint64_t index) const;
  std::vector<Assignment> collect() const;

 private:
  void unrank_combination(std::uint64_t index, std::vector<std::size_t>& chosen) const;

  const Design* design_;
  std::uint64_t size_ = 0;
};

/// Uniform draws from the design's assignment distribution.
class AssignmentSampler {
 public:
  AssignmentSampler(const Design& design, std::uint64_t seed);

  /// Writes draw `index` into `out` (resized to n).
  void draw(std::uint64_t index, Assignment& out) const;
  std::vector<Assignment> sample(std::uint64_t count) const;

 private:
  const Design* design_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------

/// p-value of the statistic on the imputed schedule: the share of reference
/// assignments whose statistic is at least (Upper) or at most (Lower) the
/// observed value. Real-valued statistics compare with a relative slack of
/// 1e-12; rank statistics compare exactly.
PValueResult p_value(const Dataset& d, const EffectSpec& e, const Statistic& stat, const Design& design,
                     const Mode& mode, Tail tail, const RunOptions& options = {},
                     ImputationVariant variant = ImputationVariant::BothSides);

/// Same, for an already-built schedule and an observed assignment.
PValueResult p_value(const Schedule& schedule, AssignmentView observed, const Statistic& stat,
                     const Design& design, const Mode& mode, Tail tail, const RunOptions& options = {});

/// True when `candidate` counts toward the tail relative to `observed`.
bool at_least_as_extreme(double candidate, double observed, Tail tail, bool exact_compare) noexcept;

/// Two-column CSV (value,count) of the distinct reference values, ascending.
void write_distribution_csv(std::ostream& out, const ReferenceDistribution& dist);

}  // namespace ribound

#include "ribound/detail/enumerator_impl.hpp"
