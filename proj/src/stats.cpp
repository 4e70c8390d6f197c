#include "ribound/stats.hpp"

#include <algorithm>
#include <limits>
#include <charconv>
#include <cmath>
#include <numeric>

namespace ribound {

// ---------------------------------------------------------------------------
// SubsetScoreTable

SubsetScoreTable::SubsetScoreTable(std::size_t n, std::size_t s) : n_(n), s_(s) {
  // C(L, s) built upward from C(s, s) = 1 via C(L, s) = C(L-1, s) * L / (L - s).
  BigInt c = 0;
  std::vector<BigInt> exact(n + 1, 0);
  bool fits = true;
  for (std::size_t L = s; L <= n; ++L) {
    c = (L == s) ? BigInt(1) : c * L / (L - s);
    exact[L] = c;
    if (c > std::numeric_limits<std::uint64_t>::max()) fits = false;
  }
  if (fits) {
    small_.resize(n + 1);
    for (std::size_t L = 0; L <= n; ++L) small_[L] = exact[L].convert_to<std::uint64_t>();
  } else {
    big_ = std::move(exact);
  }
}

void SubsetScoreTable::Accumulator::add(std::size_t L, std::size_t t) {
  if (t == 0) return;
  const auto& tab = *table_;
  if (tab.big_.empty())
    small_ += static_cast<unsigned __int128>(tab.small_[L]) - tab.small_[L - t];
  else
    big_ += tab.big_[L] - tab.big_[L - t];
}

double SubsetScoreTable::Accumulator::value() const {
  if (table_->big_.empty()) return static_cast<double>(small_);
  return big_.convert_to<double>();
}

// ---------------------------------------------------------------------------
// scalings

namespace scaling {

ScaleFn inverse_treated_count() {
  return [](AssignmentView w) {
    const auto t = std::count(w.begin(), w.end(), std::uint8_t{1});
    if (t == 0) throw Error(Errc::EmptyArm, "no treated units");
    return 1.0 / static_cast<double>(t);
  };
}

ScaleFn inverse_control_count() {
  return [](AssignmentView w) {
    const auto c = std::count(w.begin(), w.end(), std::uint8_t{0});
    if (c == 0) throw Error(Errc::EmptyArm, "no control units");
    return 1.0 / static_cast<double>(c);
  };
}

ScaleFn constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "arm scaling must be finite and non-negative");
  return [c](AssignmentView) { return c; };
}

}  // namespace scaling

// ---------------------------------------------------------------------------
// free functions

namespace {

struct ArmCounts {
  std::size_t treated = 0;
  std::size_t control = 0;
};

ArmCounts count_arms(AssignmentView w, const Schedule& s) {
  if (w.size() != s.size()) throw Error(Errc::LengthMismatch, "assignment and schedule lengths differ");
  ArmCounts c;
  for (auto v : w) (v ? c.treated : c.control) += 1;
  if (c.treated == 0 || c.control == 0) throw Error(Errc::EmptyArm, "assignment leaves an arm empty");
  return c;
}

void check_scale(double a) {
  if (!(a >= 0.0)) throw Error(Errc::InvalidArgument, "arm scaling must be non-negative");
}

}  // namespace

double diff_means(AssignmentView w, const Schedule& s) {
  const ArmCounts c = count_arms(w, s);
  double sum_t = 0.0;
  double sum_c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i])
      sum_t += s.y1[i];
    else
      sum_c += s.y0[i];
  }
  return (1.0 / static_cast<double>(c.treated)) * sum_t - (1.0 / static_cast<double>(c.control)) * sum_c;
}

double scored_sum(AssignmentView w, const Schedule& s, const ScoreFn& q, const ScaleFn& a, const ScaleFn& b) {
  if (w.size() != s.size()) throw Error(Errc::LengthMismatch, "assignment and schedule lengths differ");
  double sum_t = 0.0;
  double sum_c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i])
      sum_t += q(s.y1[i]);
    else
      sum_c += q(s.y0[i]);
  }
  const double sa = a(w);
  const double sb = b(w);
  check_scale(sa);
  check_scale(sb);
  return sa * sum_t - sb * sum_c;
}

double threshold_proportion(AssignmentView w, const Schedule& s, double cutoff) {
  const ArmCounts c = count_arms(w, s);
  double above_t = 0.0;
  double above_c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i])
      above_t += s.y1[i] > cutoff ? 1.0 : 0.0;
    else
      above_c += s.y0[i] > cutoff ? 1.0 : 0.0;
  }
  return (1.0 / static_cast<double>(c.treated)) * above_t - (1.0 / static_cast<double>(c.control)) * above_c;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // positions start..end-1 hold ranks start+1..end
    const double mid = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = mid;
    start = end;
  }
  return ranks;
}

double rank_sum(AssignmentView w, const Schedule& s) {
  if (w.size() != s.size()) throw Error(Errc::LengthMismatch, "assignment and schedule lengths differ");
  if (s.size() < 2) throw Error(Errc::DegenerateDesign, "rank sum needs n >= 2");
  const auto realized = s.realized(w);
  const auto ranks = mid_ranks(realized);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]) total += ranks[i];
  return total;
}

namespace {

void check_subset_size(std::size_t size, std::size_t n) {
  if (size < 2 || size > n)
    throw Error(Errc::SubsetSizeOutOfRange,
                "subset size " + std::to_string(size) + " outside [2, " + std::to_string(n) + "]");
}

double stephenson_with_table(AssignmentView w, const Schedule& s, const SubsetScoreTable& table) {
  const auto realized = s.realized(w);
  std::vector<std::size_t> order(realized.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return realized[a] < realized[b]; });
  SubsetScoreTable::Accumulator acc(table);
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::size_t treated = 0;
    while (end < order.size() && realized[order[end]] == realized[order[start]]) treated += w[order[end++]];
    // size-s subsets of the `end` units at or below this value that contain a treated unit at this value
    acc.add(end, treated);
    start = end;
  }
  return acc.value();
}

}  // namespace

double stephenson(AssignmentView w, const Schedule& s, std::size_t subset_size) {
  if (w.size() != s.size()) throw Error(Errc::LengthMismatch, "assignment and schedule lengths differ");
  check_subset_size(subset_size, s.size());
  const SubsetScoreTable table(s.size(), subset_size);
  return stephenson_with_table(w, s, table);
}

double welch_t(AssignmentView w, const Schedule& s) {
  const ArmCounts c = count_arms(w, s);
  if (c.treated < 2 || c.control < 2) throw Error(Errc::ArmTooSmall, "each arm needs at least two units");
  double sum_t = 0.0;
  double sum_c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i])
      sum_t += s.y1[i];
    else
      sum_c += s.y0[i];
  }
  const double nt = static_cast<double>(c.treated);
  const double nc = static_cast<double>(c.control);
  const double mean_t = sum_t / nt;
  const double mean_c = sum_c / nc;
  double ss_t = 0.0;
  double ss_c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i]) {
      const double d = s.y1[i] - mean_t;
      ss_t += d * d;
    } else {
      const double d = s.y0[i] - mean_c;
      ss_c += d * d;
    }
  }
  const double var = ss_t / (nt - 1.0) / nt + ss_c / (nc - 1.0) / nc;
  if (!(var > 0.0)) throw Error(Errc::ZeroVariance, "both arms have zero variance");
  return (mean_t - mean_c) / std::sqrt(var);
}

// ---------------------------------------------------------------------------
// Statistic

Statistic Statistic::diff_means() { return Statistic(StatKind::DiffMeans); }
Statistic Statistic::rank_sum() { return Statistic(StatKind::RankSum); }
Statistic Statistic::welch_t() { return Statistic(StatKind::WelchT); }

Statistic Statistic::stephenson(std::size_t subset_size) {
  if (subset_size < 2) throw Error(Errc::SubsetSizeOutOfRange, "Stephenson subset size must be >= 2");
  Statistic s(StatKind::Stephenson);
  s.subset_size_ = subset_size;
  return s;
}

Statistic Statistic::threshold_proportion(double cutoff) {
  if (!std::isfinite(cutoff)) throw Error(Errc::InvalidArgument, "threshold cutoff must be finite");
  Statistic s(StatKind::ThresholdProportion);
  s.cutoff_ = cutoff;
  return s;
}

Statistic Statistic::scored_sum(ScoredSumSpec spec) {
  if (!spec.score || !spec.treated_scale || !spec.control_scale)
    throw Error(Errc::InvalidArgument, "scored sum needs a score and two scalings");
  Statistic s(StatKind::ScoredSum);
  s.scored_ = std::make_shared<const ScoredSumSpec>(std::move(spec));
  return s;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(Errc::InvalidArgument, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  return value;
}

}  // namespace

Statistic Statistic::parse(std::string_view text) {
  if (text == "diff-means") return diff_means();
  if (text == "rank-sum") return rank_sum();
  if (text == "welch-t") return welch_t();
  if (text.starts_with("stephenson:"))
    return stephenson(parse_number<std::size_t>(text.substr(11), "subset size"));
  if (text.starts_with("threshold:")) return threshold_proportion(parse_number<double>(text.substr(10), "cutoff"));
  throw Error(Errc::InvalidArgument,
              "unknown statistic '" + std::string(text) +
                  "' (expected diff-means, rank-sum, stephenson:S, threshold:C, welch-t)");
}

std::string Statistic::name() const {
  switch (kind_) {
    case StatKind::DiffMeans: return "diff-means";
    case StatKind::RankSum: return "rank-sum";
    case StatKind::WelchT: return "welch-t";
    case StatKind::Stephenson: return "stephenson:" + std::to_string(subset_size_);
    case StatKind::ThresholdProportion: return "threshold:" + format_number(cutoff_);
    case StatKind::ScoredSum: return scored_->label;
  }
  return "?";
}

double Statistic::evaluate(AssignmentView w, const Schedule& s) const {
  switch (kind_) {
    case StatKind::DiffMeans: return ribound::diff_means(w, s);
    case StatKind::RankSum: return ribound::rank_sum(w, s);
    case StatKind::WelchT: return ribound::welch_t(w, s);
    case StatKind::Stephenson: return ribound::stephenson(w, s, subset_size_);
    case StatKind::ThresholdProportion: return ribound::threshold_proportion(w, s, cutoff_);
    case StatKind::ScoredSum:
      return ribound::scored_sum(w, s, scored_->score, scored_->treated_scale, scored_->control_scale);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(const Statistic& stat, const Schedule& schedule) : stat_(&stat), schedule_(&schedule) {
  const std::size_t n = schedule.size();
  switch (stat.kind()) {
    case StatKind::DiffMeans:
      q0_ = schedule.y0;
      q1_ = schedule.y1;
      break;
    case StatKind::ThresholdProportion:
      q0_.resize(n);
      q1_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        q0_[i] = schedule.y0[i] > stat.cutoff() ? 1.0 : 0.0;
        q1_[i] = schedule.y1[i] > stat.cutoff() ? 1.0 : 0.0;
      }
      break;
    case StatKind::ScoredSum:
      q0_.resize(n);
      q1_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        q0_[i] = stat.scored()->score(schedule.y0[i]);
        q1_[i] = stat.scored()->score(schedule.y1[i]);
      }
      break;
    case StatKind::Stephenson:
      check_subset_size(stat.subset_size(), n);
      table_ = SubsetScoreTable(n, stat.subset_size());
      [[fallthrough]];
    case StatKind::RankSum: {
      if (n < 2) throw Error(Errc::DegenerateDesign, "rank statistics need n >= 2");
      order0_.resize(n);
      std::iota(order0_.begin(), order0_.end(), std::size_t{0});
      order1_ = order0_;
      const auto& y0 = schedule.y0;
      const auto& y1 = schedule.y1;
      std::sort(order0_.begin(), order0_.end(), [&](std::size_t a, std::size_t b) { return y0[a] < y0[b]; });
      std::sort(order1_.begin(), order1_.end(), [&](std::size_t a, std::size_t b) { return y1[a] < y1[b]; });
      break;
    }
    case StatKind::WelchT:
      break;
  }
}

double Evaluator::operator()(AssignmentView w) {
  switch (stat_->kind()) {
    case StatKind::DiffMeans:
    case StatKind::ThresholdProportion:
    case StatKind::ScoredSum:
      return linear(w);
    case StatKind::RankSum:
    case StatKind::Stephenson:
      return ranked(w);
    case StatKind::WelchT:
      return ribound::welch_t(w, *schedule_);
  }
  return 0.0;
}

double Evaluator::linear(AssignmentView w) const {
  double sum_t = 0.0;
  double sum_c = 0.0;
  std::size_t treated = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i]) {
      sum_t += q1_[i];
      ++treated;
    } else {
      sum_c += q0_[i];
    }
  }
  if (stat_->kind() == StatKind::ScoredSum) {
    const double a = stat_->scored()->treated_scale(w);
    const double b = stat_->scored()->control_scale(w);
    check_scale(a);
    check_scale(b);
    return a * sum_t - b * sum_c;
  }
  const std::size_t control = w.size() - treated;
  if (treated == 0 || control == 0) throw Error(Errc::EmptyArm, "assignment leaves an arm empty");
  return (1.0 / static_cast<double>(treated)) * sum_t - (1.0 / static_cast<double>(control)) * sum_c;
}

double Evaluator::ranked(AssignmentView w) {
  // Realized order is the merge of treated units sorted by y1 and control
  // units sorted by y0; no per-assignment sort is needed.
  const auto& y0 = schedule_->y0;
  const auto& y1 = schedule_->y1;
  const std::size_t n = w.size();
  std::size_t a = 0;
  std::size_t b = 0;
  auto skip_treated = [&] {
    while (a < n && !w[order1_[a]]) ++a;
  };
  auto skip_control = [&] {
    while (b < n && w[order0_[b]]) ++b;
  };
  skip_treated();
  skip_control();

  const bool is_rank_sum = stat_->kind() == StatKind::RankSum;
  double rank_total = 0.0;
  SubsetScoreTable::Accumulator acc(table_);
  std::size_t pos = 0;
  while (a < n || b < n) {
    const double v = (a < n && (b >= n || y1[order1_[a]] <= y0[order0_[b]])) ? y1[order1_[a]] : y0[order0_[b]];
    std::size_t group = 0;
    std::size_t treated = 0;
    while (a < n && y1[order1_[a]] == v) {
      ++group;
      ++treated;
      ++a;
      skip_treated();
    }
    while (b < n && y0[order0_[b]] == v) {
      ++group;
      ++b;
      skip_control();
    }
    if (is_rank_sum)
      rank_total += static_cast<double>(treated) * 0.5 * static_cast<double>(2 * pos + group + 1);
    else
      acc.add(pos + group, treated);
    pos += group;
  }
  return is_rank_sum ? rank_total : acc.value();
}

}  // namespace ribound
