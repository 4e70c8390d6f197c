#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ribound/core.hpp"
#include "ribound/subset_scores.hpp"

namespace ribound {

enum class StatKind { DiffMeans, ScoredSum, RankSum, Stephenson, ThresholdProportion, WelchT };

/// Score transform applied to each realized outcome. Must be non-decreasing.
using ScoreFn = std::function<double(double)>;
/// Arm scaling a(W) or b(W). Must be non-negative for every admissible W.
using ScaleFn = std::function<double(AssignmentView)>;

namespace scaling {
ScaleFn inverse_treated_count();  // 1 / n_T
ScaleFn inverse_control_count();  // 1 / n_C
ScaleFn constant(double c);
}  // namespace scaling

struct ScoredSumSpec {
  ScoreFn score;
  ScaleFn treated_scale;
  ScaleFn control_scale;
  std::string label = "scored-sum";
};

/// Test statistic T(w, S) evaluated on realized outcomes: unit i contributes
/// y1_i when treated and y0_i otherwise.
class Statistic {
 public:
  static Statistic diff_means();
  static Statistic rank_sum();
  static Statistic stephenson(std::size_t subset_size);
  /// Treated-minus-control proportion of outcomes strictly above the cutoff.
  static Statistic threshold_proportion(double cutoff);
  static Statistic welch_t();
  static Statistic scored_sum(ScoredSumSpec spec);

  /// Parses the CLI form: diff-means, rank-sum, stephenson:S, threshold:C, welch-t.
  static Statistic parse(std::string_view text);

  StatKind kind() const noexcept { return kind_; }
  /// Effect-increasing: every kind except the studentized difference.
  bool effect_increasing() const noexcept { return kind_ != StatKind::WelchT; }
  /// Values are integers or half-integers and compare exactly.
  bool exact_valued() const noexcept { return kind_ == StatKind::RankSum || kind_ == StatKind::Stephenson; }
  std::string name() const;

  std::size_t subset_size() const noexcept { return subset_size_; }
  double cutoff() const noexcept { return cutoff_; }
  const ScoredSumSpec* scored() const noexcept { return scored_.get(); }

  double evaluate(AssignmentView w, const Schedule& s) const;

 private:
  explicit Statistic(StatKind k) : kind_(k) {}
  StatKind kind_;
  std::size_t subset_size_ = 0;
  double cutoff_ = 0.0;
  std::shared_ptr<const ScoredSumSpec> scored_;
};

// Free-function forms. All throw EmptyArm when w leaves an arm empty.

double diff_means(AssignmentView w, const Schedule& s);
double scored_sum(AssignmentView w, const Schedule& s, const ScoreFn& q, const ScaleFn& a, const ScaleFn& b);
double threshold_proportion(AssignmentView w, const Schedule& s, double cutoff);
/// Sum of treated mid-ranks of the realized outcomes.
double rank_sum(AssignmentView w, const Schedule& s);
/// Number of size-s subsets whose (tied-for) largest realized outcome belongs
/// to a treated unit. Errors: SubsetSizeOutOfRange.
double stephenson(AssignmentView w, const Schedule& s, std::size_t subset_size);
/// (mean_T - mean_C) / sqrt(var_T/n_T + var_C/n_C). Errors: ArmTooSmall, ZeroVariance.
double welch_t(AssignmentView w, const Schedule& s);

/// Mid-ranks (1-based, ties share the average rank).
std::vector<double> mid_ranks(std::span<const double> values);

/// Statistic bound to one schedule for repeated evaluation over many
/// assignments. Holds scratch buffers: use one instance per thread.
class Evaluator {
 public:
  Evaluator(const Statistic& stat, const Schedule& schedule);

  double operator()(AssignmentView w);

 private:
  double linear(AssignmentView w) const;
  double ranked(AssignmentView w);

  const Statistic* stat_;
  const Schedule* schedule_;
  std::vector<double> q0_, q1_;                 // per-unit scores for linear kinds
  std::vector<std::size_t> order0_, order1_;    // units sorted by y0 / y1
  SubsetScoreTable table_;
};

}  // namespace ribound
